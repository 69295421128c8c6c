//! Writes a tiny on-disk dataset (images, label sidecars, ground truth)
//! for driving the CLI by hand. Usage: gen_verify_data <out_dir>

use std::fs;
use std::path::PathBuf;

use fzseg::imaging::{save_gray_png, save_mask_png, save_rgb_png};
use fzseg::synth::{dermoscopy_fixture, DermoscopyFixture};

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).expect("usage: gen_verify_data <dir>"));
    for sub in ["images", "labels", "gt"] {
        fs::create_dir_all(root.join(sub)).unwrap();
    }
    for seed in [7u64, 8, 9] {
        let fix = dermoscopy_fixture(512, 384, seed);
        let name = format!("sample_{seed}");
        save_rgb_png(&fix.image, &root.join("images").join(format!("{name}.png"))).unwrap();
        let map = fix.label_map(3, 1000, seed).unwrap();
        save_gray_png(
            &DermoscopyFixture::label_image(&map),
            &root.join("labels").join(format!("{name}_labels.png")),
        )
        .unwrap();
        save_mask_png(
            &fix.lesion,
            &root.join("gt").join(format!("{name}_Segmentation.png")),
        )
        .unwrap();
    }
    println!("wrote 3 samples under {}", root.display());
}
