//! Property tests for the algebraic invariants: morphology laws, fuzzy
//! partition arithmetic, forest prediction guarantees, and model
//! serialization round trips.

use proptest::prelude::*;

use fzseg::features::feature_names;
use fzseg::forest::{load_model, save_model, train};
use fzseg::fuzzy::{alpha_cut, probability_images, FuzzyPartition};
use fzseg::imaging::{dilate, erode, fill_holes, largest_component, StructuringElement};
use fzseg::{BinaryMask, ExtractOptions, PixelClass, TrainingSet};

// ---- helpers ---------------------------------------------------------------

/// Random mask with a cleared border frame: the structuring element never
/// pokes past the image edge, so the textbook laws apply globally.
fn frame_cleared_mask(w: usize, h: usize, frame: usize, bits: &[bool]) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        let interior =
            x >= frame && y >= frame && x + frame < w && y + frame < h;
        interior && bits[y * w + x]
    })
}

fn mask_strategy(w: usize, h: usize) -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(any::<bool>(), w * h)
}

/// Independent flood fill (4/8-way switch) used as an oracle for the
/// component logic.
fn flood_components_8(mask: &BinaryMask) -> Vec<Vec<usize>> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if !mask.data()[start] || seen[start] {
            continue;
        }
        let mut pixels = vec![start];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if mask.data()[j] && !seen[j] {
                        seen[j] = true;
                        pixels.push(j);
                        stack.push(j);
                    }
                }
            }
        }
        pixels.sort_unstable();
        out.push(pixels);
    }
    out
}

fn subset(a: &BinaryMask, b: &BinaryMask) -> bool {
    a.data().iter().zip(b.data()).all(|(&x, &y)| !x || y)
}

// ---- morphology ------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Opening never adds pixels; closing (away from the border) never
    /// removes any.
    #[test]
    fn opening_anti_extensive_closing_extensive(
        bits in mask_strategy(48, 40),
        radius in 1usize..=4,
    ) {
        let se = StructuringElement::disk(radius).unwrap();
        // Clearing 2r keeps even the dilated mask away from the edge.
        let m = frame_cleared_mask(48, 40, 2 * radius, &bits);
        let opened = dilate(&erode(&m, &se), &se);
        let closed = erode(&dilate(&m, &se), &se);
        prop_assert!(subset(&opened, &m), "opening added pixels");
        prop_assert!(subset(&m, &closed), "closing dropped pixels");
        prop_assert!(subset(&opened, &closed), "sandwich violated");
    }

    /// Erosion of the complement equals the complement of the dilation,
    /// for every pixel the structuring element fully reaches.
    #[test]
    fn erode_dilate_duality_in_the_interior(
        bits in mask_strategy(48, 40),
        radius in 1usize..=4,
    ) {
        let se = StructuringElement::disk(radius).unwrap();
        let m = BinaryMask::new(48, 40, bits).unwrap();
        let lhs = erode(&m.complement(), &se);
        let rhs = dilate(&m, &se).complement();
        for y in radius..40 - radius {
            for x in radius..48 - radius {
                prop_assert_eq!(lhs.get(x, y), rhs.get(x, y), "at ({}, {})", x, y);
            }
        }
    }

    /// Erosion and dilation preserve the subset order.
    #[test]
    fn morphology_is_monotone(
        bits_a in mask_strategy(32, 32),
        bits_b in mask_strategy(32, 32),
        radius in 1usize..=3,
    ) {
        let se = StructuringElement::disk(radius).unwrap();
        let a = BinaryMask::new(32, 32, bits_a).unwrap();
        // b = a union extra, so a is a subset of b by construction.
        let b = BinaryMask::new(32, 32, bits_b).unwrap().union(&a);
        prop_assert!(subset(&erode(&a, &se), &erode(&b, &se)));
        prop_assert!(subset(&dilate(&a, &se), &dilate(&b, &se)));
    }

    /// The largest component matches an independent flood fill, pixel for
    /// pixel (largest area, ties to the smallest starting index).
    #[test]
    fn largest_component_matches_flood_oracle(bits in mask_strategy(40, 32)) {
        let m = BinaryMask::new(40, 32, bits).unwrap();
        let got = largest_component(&m);
        let comps = flood_components_8(&m);
        if comps.is_empty() {
            prop_assert!(got.is_empty());
        } else {
            let best = comps
                .iter()
                .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
                .unwrap();
            let mut expect = vec![false; 40 * 32];
            for &i in best {
                expect[i] = true;
            }
            prop_assert_eq!(got.data(), &expect[..]);
        }
    }

    /// Filling holes only adds pixels, keeps anything connected to the
    /// border background unfilled, and is idempotent.
    #[test]
    fn fill_holes_properties(bits in mask_strategy(32, 28)) {
        let m = BinaryMask::new(32, 28, bits).unwrap();
        let filled = fill_holes(&m);
        prop_assert!(subset(&m, &filled));
        let again = fill_holes(&filled);
        prop_assert_eq!(filled.data(), again.data());
        // Background pixels on the border must stay background.
        for x in 0..32 {
            prop_assert!(!(!m.get(x, 0) && filled.get(x, 0)));
            prop_assert!(!(!m.get(x, 27) && filled.get(x, 27)));
        }
    }
}

// ---- fuzzy partitions -------------------------------------------------------

fn membership_strategy(n: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    proptest::collection::vec([0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0], n).prop_map(|raw| {
        raw.into_iter()
            .map(|[a, b, c]| {
                let s = (a + b + c).max(1e-12);
                [a / s, b / s, c / s]
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Quantized probability planes always sum to exactly 255, and every
    /// alpha-cut family at 1/3 covers each pixel at least once.
    #[test]
    fn quantization_and_cut_coverage(mu in membership_strategy(24 * 16)) {
        let unzip = |k: usize| mu.iter().map(|m| m[k]).collect::<Vec<_>>();
        let p = FuzzyPartition::new(24, 16, unzip(0), unzip(1), unzip(2)).unwrap();
        let imgs = probability_images(&p);
        for i in 0..24 * 16 {
            let sum = imgs.lesion.data()[i] as u16
                + imgs.skin.data()[i] as u16
                + imgs.other.data()[i] as u16;
            prop_assert_eq!(sum, 255, "pixel {}", i);
        }
        let cuts: Vec<BinaryMask> = PixelClass::ALL
            .iter()
            .map(|&c| alpha_cut(&p, c, 1.0 / 3.0))
            .collect();
        for i in 0..24 * 16 {
            prop_assert!(
                cuts.iter().any(|c| c.data()[i]),
                "pixel {} uncovered at alpha = 1/3",
                i
            );
        }
    }

    /// Alpha-cuts shrink as alpha grows.
    #[test]
    fn alpha_cuts_are_nested(mu in membership_strategy(16 * 12), lo in 0.0f64..0.5) {
        let unzip = |k: usize| mu.iter().map(|m| m[k]).collect::<Vec<_>>();
        let p = FuzzyPartition::new(16, 12, unzip(0), unzip(1), unzip(2)).unwrap();
        let hi = lo + 0.3;
        for class in PixelClass::ALL {
            let wide = alpha_cut(&p, class, lo);
            let narrow = alpha_cut(&p, class, hi);
            prop_assert!(subset(&narrow, &wide));
        }
    }
}

// ---- forest ----------------------------------------------------------------

/// Small synthetic training set with three Gaussian-ish clusters, enough
/// for the forest to have real structure.
fn cluster_set(per_class: usize, num_features: usize, seed: u64) -> TrainingSet {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let names = (0..num_features).map(|i| format!("f{i}")).collect();
    let mut set = TrainingSet::new(names);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (class, center) in [
        (PixelClass::Lesion, 0.0f32),
        (PixelClass::Skin, 3.0),
        (PixelClass::Other, 6.0),
    ] {
        for _ in 0..per_class {
            let row: Vec<f32> = (0..num_features)
                .map(|_| center + rng.random::<f32>() * 1.5)
                .collect();
            set.push_row(&row, class).unwrap();
        }
    }
    set
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Probabilities from the forest are a distribution, training is
    /// deterministic in the seed, and the model file round-trips exactly.
    #[test]
    fn forest_prediction_and_io_invariants(
        seed in 0u64..1000,
        n_trees in 1usize..8,
    ) {
        let set = cluster_set(15, 6, seed);
        let model = train(&set, n_trees, 3, seed).unwrap();
        let again = train(&set, n_trees, 3, seed).unwrap();
        prop_assert_eq!(&model, &again);

        let mut probe = vec![0.0f32; 6];
        for (i, v) in probe.iter_mut().enumerate() {
            *v = (seed % 7) as f32 + i as f32 * 0.5;
        }
        let p = model.predict_proba(&probe).unwrap();
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12, "sum {}", sum);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.fzsg");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        prop_assert_eq!(&model, &loaded);
        prop_assert_eq!(loaded.predict_proba(&probe).unwrap(), p);
    }
}

// ---- feature naming ---------------------------------------------------------

#[test]
fn fingerprint_is_stable_and_sized() {
    let names = feature_names(&ExtractOptions::default());
    assert_eq!(names.len(), 159);
    let again = feature_names(&ExtractOptions::default());
    assert_eq!(names, again);
}
