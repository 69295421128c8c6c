//! Model persistence.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! magic            4 bytes  "FZSG"
//! format version   u16      currently 1
//! features/split   u16
//! tree count       u32
//! feature count    u32
//! features         feature count x { name length u16, UTF-8 bytes }
//! trees            tree count x {
//!     node count   u32
//!     nodes (preorder) x {
//!         tag u8: 0 = split, 1 = leaf
//!         split: feature u16, threshold f64, left u32, right u32
//!         leaf:  three class counts u64
//!     }
//! }
//! ```
//!
//! Loading validates magic, version, node indices (children must point
//! forward, which preorder guarantees and which makes traversal provably
//! terminate) and leaf sanity, and rejects trailing bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::forest::tree::{Node, Tree};
use crate::forest::ForestModel;

const MAGIC: [u8; 4] = *b"FZSG";
const FORMAT_VERSION: u16 = 1;

// Guard rails against absurd allocations from corrupt headers.
const MAX_TREES: u32 = 1 << 20;
const MAX_FEATURES: u32 = 1 << 16;
const MAX_NAME_LEN: u16 = 4096;
const MAX_NODES: u32 = 1 << 28;

fn badfile(msg: impl Into<String>) -> Error {
    Error::IncompatibleModel(msg.into())
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| badfile("unexpected end of file"))?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

/// Writes `model` to `path`, creating or truncating the file.
pub fn save_model(model: &ForestModel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path, e);
    w.write_all(&MAGIC).map_err(io_err)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(model.features_per_split() as u16).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&(model.num_trees() as u32).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&(model.fingerprint().len() as u32).to_le_bytes())
        .map_err(io_err)?;
    for name in model.fingerprint() {
        let bytes = name.as_bytes();
        w.write_all(&(bytes.len() as u16).to_le_bytes())
            .map_err(io_err)?;
        w.write_all(bytes).map_err(io_err)?;
    }
    for tree in model.trees() {
        w.write_all(&(tree.nodes.len() as u32).to_le_bytes())
            .map_err(io_err)?;
        for node in &tree.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    w.write_all(&[0u8]).map_err(io_err)?;
                    w.write_all(&feature.to_le_bytes()).map_err(io_err)?;
                    w.write_all(&threshold.to_le_bytes()).map_err(io_err)?;
                    w.write_all(&left.to_le_bytes()).map_err(io_err)?;
                    w.write_all(&right.to_le_bytes()).map_err(io_err)?;
                }
                Node::Leaf { counts } => {
                    w.write_all(&[1u8]).map_err(io_err)?;
                    for c in counts {
                        w.write_all(&c.to_le_bytes()).map_err(io_err)?;
                    }
                }
            }
        }
    }
    w.flush().map_err(io_err)
}

/// Reads a model saved by [`save_model`].
pub fn load_model(path: &Path) -> Result<ForestModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        inner: BufReader::new(file),
    };
    if r.bytes::<4>()? != MAGIC {
        return Err(badfile("bad magic, not a model file"));
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(badfile(format!(
            "format version {version}, this build reads {FORMAT_VERSION}"
        )));
    }
    let features_per_split = r.u16()? as usize;
    if features_per_split == 0 {
        return Err(badfile("features_per_split is zero"));
    }
    let n_trees = r.u32()?;
    if n_trees == 0 || n_trees > MAX_TREES {
        return Err(badfile(format!("implausible tree count {n_trees}")));
    }
    let n_features = r.u32()?;
    if n_features == 0 || n_features > MAX_FEATURES {
        return Err(badfile(format!("implausible feature count {n_features}")));
    }
    let mut fingerprint = Vec::with_capacity(n_features as usize);
    for _ in 0..n_features {
        let len = r.u16()?;
        if len == 0 || len > MAX_NAME_LEN {
            return Err(badfile(format!("implausible feature name length {len}")));
        }
        let mut buf = vec![0u8; len as usize];
        r.inner
            .read_exact(&mut buf)
            .map_err(|_| badfile("unexpected end of file"))?;
        fingerprint.push(
            String::from_utf8(buf).map_err(|_| badfile("feature name is not UTF-8"))?,
        );
    }
    let mut trees = Vec::with_capacity(n_trees as usize);
    for t in 0..n_trees {
        let n_nodes = r.u32()?;
        if n_nodes == 0 || n_nodes > MAX_NODES {
            return Err(badfile(format!(
                "tree {t} has implausible node count {n_nodes}"
            )));
        }
        let mut nodes = Vec::with_capacity(n_nodes as usize);
        for i in 0..n_nodes {
            let node = match r.u8()? {
                0 => {
                    let feature = r.u16()?;
                    if feature as u32 >= n_features {
                        return Err(badfile(format!(
                            "tree {t} node {i}: feature {feature} out of range"
                        )));
                    }
                    let threshold = r.f64()?;
                    if threshold.is_nan() {
                        return Err(badfile(format!("tree {t} node {i}: NaN threshold")));
                    }
                    let left = r.u32()?;
                    let right = r.u32()?;
                    // Preorder: children strictly after the parent.
                    if left <= i || right <= i || left >= n_nodes || right >= n_nodes {
                        return Err(badfile(format!(
                            "tree {t} node {i}: child indices {left}/{right} not preorder"
                        )));
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    }
                }
                1 => {
                    let counts = [r.u64()?, r.u64()?, r.u64()?];
                    if counts.iter().all(|&c| c == 0) {
                        return Err(badfile(format!("tree {t} node {i}: empty leaf")));
                    }
                    Node::Leaf { counts }
                }
                tag => return Err(badfile(format!("tree {t} node {i}: unknown tag {tag}"))),
            };
            nodes.push(node);
        }
        trees.push(Tree { nodes });
    }
    let mut probe = [0u8; 1];
    match r.inner.read(&mut probe) {
        Ok(0) => {}
        Ok(_) => return Err(badfile("trailing bytes after the last tree")),
        Err(e) => return Err(Error::io(path, e)),
    }
    Ok(ForestModel::from_parts(
        fingerprint,
        features_per_split,
        trees,
    ))
}
