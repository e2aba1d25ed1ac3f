use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};
use tract_onnx::prelude::*;
use tract_onnx::tract_hir::internal::{DimLike, Factoid};

use super::{EmbedError, EmbeddingBackend};
use crate::preprocess::TokenSequence;

/// Sequences per inference call. Short batches are padded up to this size so
/// one compiled plan serves every call of a given sequence length.
const PLAN_BATCH: usize = 8;
const PROBE_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Ids,
    Mask,
    TokenTypes,
}

/// Frozen transformer encoder loaded from an ONNX export.
///
/// The graph must take token ids and an attention mask (plus, optionally,
/// token type ids) shaped `[B, L]` and produce last-layer hidden states
/// `[B, L, H]` as its first output. Weights are only ever read.
pub struct OnnxEncoder {
    model: InferenceModel,
    roles: Vec<Role>,
    input_type: DatumType,
    width: usize,
    name: String,
    plans: Mutex<HashMap<(usize, usize), Arc<TypedRunnableModel>>>,
}

impl std::fmt::Debug for OnnxEncoder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxEncoder").field("name", &self.name).field("width", &self.width).finish()
    }
}

impl OnnxEncoder {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, EmbedError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| EmbedError::Io { path: path.display().to_string(), source })?;
        let model = tract_onnx::onnx()
            .model_for_read(&mut bytes.as_slice())
            .map_err(|e| EmbedError::Model { path: path.display().to_string(), message: format!("{e:#}") })?;
        let digest = hex::encode(Sha256::digest(&bytes));
        drop(bytes);

        let roles = input_roles(&model)?;
        let input_type = match model.input_fact(0).ok().and_then(|f| f.datum_type.concretize()) {
            Some(DatumType::I32) => DatumType::I32,
            _ => DatumType::I64,
        };
        let mut encoder = OnnxEncoder {
            model,
            roles,
            input_type,
            width: 0,
            name: format!("onnx:{}", &digest[..16]),
            plans: Mutex::new(HashMap::new()),
        };
        let plan = encoder.compile(1, PROBE_LEN)?;
        let fact = plan.model().output_fact(0).map_err(|e| EmbedError::Signature(e.to_string()))?;
        let dims: Vec<Option<usize>> = fact.shape.iter().map(|d| d.to_usize().ok()).collect();
        if dims.len() != 3 {
            return Err(EmbedError::Signature(format!(
                "first output must be hidden states [B, L, H], got rank {}",
                dims.len()
            )));
        }
        if fact.datum_type != f32::datum_type() {
            return Err(EmbedError::Signature(format!("hidden states must be f32, got {:?}", fact.datum_type)));
        }
        encoder.width = match dims[2] {
            Some(h) if h > 0 => h,
            _ => return Err(EmbedError::Signature("hidden width is not a concrete dimension".into())),
        };
        Ok(encoder)
    }

    fn plan(&self, batch: usize, len: usize) -> Result<Arc<TypedRunnableModel>, EmbedError> {
        let mut plans = self.plans.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(p) = plans.get(&(batch, len)) {
            return Ok(p.clone());
        }
        let plan = self.compile(batch, len)?;
        plans.insert((batch, len), plan.clone());
        Ok(plan)
    }

    fn compile(&self, batch: usize, len: usize) -> Result<Arc<TypedRunnableModel>, EmbedError> {
        let mut model = self.model.clone();
        for i in 0..self.roles.len() {
            let fact = InferenceFact::dt_shape(self.input_type, tvec!(batch, len));
            model.set_input_fact(i, fact).map_err(|e| EmbedError::Signature(format!("{e:#}")))?;
        }
        model
            .into_optimized()
            .and_then(|m| m.into_runnable())
            .map_err(|e| EmbedError::Signature(format!("{e:#}")))
    }

    fn input_tensor(&self, role: Role, batch: &[TokenSequence], len: usize) -> Tensor {
        let value = |s: &TokenSequence, j: usize| -> i64 {
            match role {
                Role::Ids => s.ids[j] as i64,
                Role::Mask => s.attention_mask[j] as i64,
                Role::TokenTypes => 0,
            }
        };
        let rows = PLAN_BATCH.max(batch.len());
        // Padding rows repeat the first sequence; their outputs are dropped.
        let pick = |r: usize| batch.get(r).unwrap_or(&batch[0]);
        match self.input_type {
            DatumType::I32 => {
                tract_ndarray::Array2::from_shape_fn((rows, len), |(r, j)| value(pick(r), j) as i32).into()
            }
            _ => tract_ndarray::Array2::from_shape_fn((rows, len), |(r, j)| value(pick(r), j)).into(),
        }
    }
}

fn input_roles(model: &InferenceModel) -> Result<Vec<Role>, EmbedError> {
    let names: Vec<String> = model
        .input_outlets()
        .map_err(|e| EmbedError::Signature(e.to_string()))?
        .iter()
        .map(|o| model.node(o.node).name.to_lowercase())
        .collect();
    let roles: Vec<Role> = match names.len() {
        2 | 3 => names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                if n.contains("mask") {
                    Role::Mask
                } else if n.contains("type") || n.contains("segment") {
                    Role::TokenTypes
                } else if n.contains("id") || i == 0 {
                    Role::Ids
                } else {
                    Role::Mask
                }
            })
            .collect(),
        n => return Err(EmbedError::Signature(format!("expected 2 or 3 inputs (ids, mask[, token types]), found {n}"))),
    };
    let count = |r: Role| roles.iter().filter(|&&x| x == r).count();
    if count(Role::Ids) != 1 || count(Role::Mask) != 1 || count(Role::TokenTypes) > 1 {
        return Err(EmbedError::Signature(format!("cannot identify ids and attention mask among inputs {names:?}")));
    }
    Ok(roles)
}

impl EmbeddingBackend for OnnxEncoder {
    fn name(&self) -> &str {
        &self.name
    }

    fn hidden_width(&self) -> usize {
        self.width
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn chunk_size(&self) -> usize {
        PLAN_BATCH
    }

    fn embed_raw(&self, batch: &[TokenSequence]) -> Result<Vec<Vec<f32>>, EmbedError> {
        let Some(first) = batch.first() else {
            return Ok(Vec::new());
        };
        let len = first.len();
        let rows = PLAN_BATCH.max(batch.len());
        let plan = self.plan(rows, len)?;
        let inputs: TVec<TValue> =
            self.roles.iter().map(|&role| self.input_tensor(role, batch, len).into()).collect();
        let outputs = plan.run(inputs).map_err(|e| EmbedError::Inference(format!("{e:#}")))?;
        let hidden = outputs[0].to_plain_array_view::<f32>().map_err(|e| EmbedError::Inference(e.to_string()))?;
        let shape = hidden.shape().to_vec();
        if shape != [rows, len, self.width] {
            return Err(EmbedError::Signature(format!(
                "hidden states shaped {shape:?}, expected [{rows}, {len}, {}]",
                self.width
            )));
        }
        let hidden = hidden.into_dimensionality::<tract_ndarray::Ix3>().map_err(|e| EmbedError::Inference(e.to_string()))?;
        Ok((0..batch.len())
            .map(|r| hidden.index_axis(tract_ndarray::Axis(0), r).iter().copied().collect())
            .collect())
    }
}
