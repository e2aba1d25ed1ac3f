//! Binary model files.
//!
//! TF-IDF (`CBTF`, version 1): doc count (u64), term count (u64), then per
//! column in order: term (u32 length + UTF-8), idf (f64).
//!
//! Boosted trees (`CBGB`, version 1): base score (f64), shrinkage (f64), tree
//! count (u64), then per tree a node count (u32) and nodes in arena order.
//! A node is tag 0 + leaf value (f64), or tag 1 + feature (u32), threshold
//! (f64), left (u32), right (u32).
//!
//! All integers and reals are little-endian.

use std::collections::BTreeMap;
use std::path::Path;

use super::{BaselineError, GbtModel, TfidfModel, Tree, TreeNode};
use crate::codec::{DecodeError, Decoder, Encoder};

const TFIDF_MAGIC: &[u8; 4] = b"CBTF";
const GBT_MAGIC: &[u8; 4] = b"CBGB";
const VERSION: u32 = 1;

pub fn tfidf_to_bytes(model: &TfidfModel) -> Vec<u8> {
    let mut e = Encoder::new(TFIDF_MAGIC, VERSION);
    e.u64(model.doc_count as u64);
    e.u64(model.idf.len() as u64);
    let mut by_col: Vec<(&str, usize)> = model.vocabulary.iter().map(|(t, &c)| (t.as_str(), c)).collect();
    by_col.sort_by_key(|&(_, c)| c);
    for (term, col) in by_col {
        e.str(term);
        e.f64(model.idf[col]);
    }
    e.finish()
}

pub fn tfidf_from_bytes(bytes: &[u8]) -> Result<TfidfModel, BaselineError> {
    let mut d = Decoder::new(bytes, TFIDF_MAGIC, VERSION)?;
    let doc_count = d.u64()? as usize;
    let n = d.u64()? as usize;
    let mut vocabulary = BTreeMap::new();
    let mut idf = Vec::new();
    for col in 0..n {
        let term = d.str()?;
        let value = d.f64()?;
        if !(value.is_finite() && value > 0.0) {
            return Err(DecodeError::Invalid(format!("idf of {term:?} is {value}")).into());
        }
        if vocabulary.insert(term.clone(), col).is_some() {
            return Err(DecodeError::Invalid(format!("duplicate term {term:?}")).into());
        }
        idf.push(value);
    }
    d.finish()?;
    Ok(TfidfModel { vocabulary, idf, doc_count })
}

pub fn gbt_to_bytes(model: &GbtModel) -> Vec<u8> {
    let mut e = Encoder::new(GBT_MAGIC, VERSION);
    e.f64(model.base_score);
    e.f64(model.shrinkage);
    e.u64(model.trees.len() as u64);
    for tree in &model.trees {
        e.u32(tree.nodes.len() as u32);
        for node in &tree.nodes {
            match *node {
                TreeNode::Leaf(v) => {
                    e.u8(0);
                    e.f64(v);
                }
                TreeNode::Split { feature, threshold, left, right } => {
                    e.u8(1);
                    e.u32(feature);
                    e.f64(threshold);
                    e.u32(left);
                    e.u32(right);
                }
            }
        }
    }
    e.finish()
}

pub fn gbt_from_bytes(bytes: &[u8]) -> Result<GbtModel, BaselineError> {
    let mut d = Decoder::new(bytes, GBT_MAGIC, VERSION)?;
    let base_score = d.f64()?;
    let shrinkage = d.f64()?;
    let n_trees = d.u64()? as usize;
    let mut trees = Vec::new();
    for _ in 0..n_trees {
        let n = d.u32()? as usize;
        if n == 0 {
            return Err(DecodeError::Invalid("empty tree".into()).into());
        }
        let mut nodes = Vec::new();
        for at in 0..n {
            let node = match d.u8()? {
                0 => TreeNode::Leaf(d.f64()?),
                1 => {
                    let (feature, threshold, left, right) = (d.u32()?, d.f64()?, d.u32()?, d.u32()?);
                    // Children after the parent keeps traversal acyclic.
                    if left as usize <= at || right as usize <= at || left as usize >= n || right as usize >= n {
                        return Err(DecodeError::Invalid(format!("node {at} has out-of-order children")).into());
                    }
                    TreeNode::Split { feature, threshold, left, right }
                }
                tag => return Err(DecodeError::Invalid(format!("unknown node tag {tag}")).into()),
            };
            nodes.push(node);
        }
        trees.push(Tree { nodes });
    }
    d.finish()?;
    Ok(GbtModel { trees, shrinkage, base_score })
}

fn read(path: &Path) -> Result<Vec<u8>, BaselineError> {
    std::fs::read(path).map_err(|source| BaselineError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, bytes: Vec<u8>) -> Result<(), BaselineError> {
    std::fs::write(path, bytes).map_err(|source| BaselineError::Io { path: path.display().to_string(), source })
}

pub fn save_tfidf(model: &TfidfModel, path: impl AsRef<Path>) -> Result<(), BaselineError> {
    write(path.as_ref(), tfidf_to_bytes(model))
}

pub fn load_tfidf(path: impl AsRef<Path>) -> Result<TfidfModel, BaselineError> {
    tfidf_from_bytes(&read(path.as_ref())?)
}

pub fn save_gbt(model: &GbtModel, path: impl AsRef<Path>) -> Result<(), BaselineError> {
    write(path.as_ref(), gbt_to_bytes(model))
}

pub fn load_gbt(path: impl AsRef<Path>) -> Result<GbtModel, BaselineError> {
    gbt_from_bytes(&read(path.as_ref())?)
}
