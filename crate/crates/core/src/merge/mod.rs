//! Checkpoint merging by linear or spherical interpolation, preserving
//! designated tensors from the visually instructed model.
//!
//! Interpolation arithmetic runs in 32-bit floats regardless of storage
//! dtype; dot products and norms accumulate in 64-bit. The interpolation
//! angle is computed per tensor over its flattened elements.

mod format;

pub use format::{read_checkpoint, write_checkpoint};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use half::{bf16, f16};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dtype {
    F16,
    Bf16,
    F32,
}

impl Dtype {
    pub fn byte_width(self) -> usize {
        match self {
            Dtype::F16 | Dtype::Bf16 => 2,
            Dtype::F32 => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::F16 => "F16",
            Dtype::Bf16 => "BF16",
            Dtype::F32 => "F32",
        }
    }
}

impl FromStr for Dtype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F16" => Ok(Dtype::F16),
            "BF16" => Ok(Dtype::Bf16),
            "F32" => Ok(Dtype::F32),
            other => Err(Error::InvalidParam(format!("unsupported dtype {other:?}"))),
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named tensor: raw little-endian element buffer plus dtype and shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    pub data: Vec<u8>,
}

impl Tensor {
    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.element_count() * self.dtype.byte_width();
        if self.data.len() != expected {
            return Err(Error::InvalidRecord(format!(
                "tensor {}: buffer holds {} bytes, shape requires {}",
                self.name,
                self.data.len(),
                expected
            )));
        }
        Ok(())
    }

    pub fn from_f32(name: impl Into<String>, shape: Vec<usize>, values: &[f32]) -> Tensor {
        let t = Tensor {
            name: name.into(),
            dtype: Dtype::F32,
            shape,
            data: encode_f32(values, Dtype::F32),
        };
        debug_assert!(t.validate().is_ok());
        t
    }

    /// Decodes the buffer to 32-bit floats.
    pub fn to_f32_vec(&self) -> Vec<f32> {
        match self.dtype {
            Dtype::F32 => self
                .data
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect(),
            Dtype::F16 => self
                .data
                .chunks_exact(2)
                .map(|b| f16::from_le_bytes([b[0], b[1]]).to_f32())
                .collect(),
            Dtype::Bf16 => self
                .data
                .chunks_exact(2)
                .map(|b| bf16::from_le_bytes([b[0], b[1]]).to_f32())
                .collect(),
        }
    }
}

fn encode_f32(values: &[f32], dtype: Dtype) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * dtype.byte_width());
    for &v in values {
        match dtype {
            Dtype::F32 => out.extend_from_slice(&v.to_le_bytes()),
            Dtype::F16 => out.extend_from_slice(&f16::from_f32(v).to_le_bytes()),
            Dtype::Bf16 => out.extend_from_slice(&bf16::from_f32(v).to_le_bytes()),
        }
    }
    out
}

fn check_compatible(w1: &Tensor, w2: &Tensor) -> Result<()> {
    if w1.shape != w2.shape {
        return Err(Error::ShapeMismatch {
            name: w1.name.clone(),
            left: w1.shape.clone(),
            right: w2.shape.clone(),
        });
    }
    if w1.dtype != w2.dtype {
        return Err(Error::DtypeMismatch {
            name: w1.name.clone(),
            left: w1.dtype.as_str(),
            right: w2.dtype.as_str(),
        });
    }
    Ok(())
}

fn combine(w1: &Tensor, w2: &Tensor, c1: f32, c2: f32) -> Tensor {
    let a = w1.to_f32_vec();
    let b = w2.to_f32_vec();
    let merged: Vec<f32> = a.iter().zip(&b).map(|(&x, &y)| c1 * x + c2 * y).collect();
    Tensor {
        name: w1.name.clone(),
        dtype: w1.dtype,
        shape: w1.shape.clone(),
        data: encode_f32(&merged, w1.dtype),
    }
}

/// Elementwise (1-alpha)*w1 + alpha*w2, written back in the source dtype.
pub fn lerp_tensor(w1: &Tensor, w2: &Tensor, alpha: f64) -> Result<Tensor> {
    check_compatible(w1, w2)?;
    let alpha = alpha as f32;
    Ok(combine(w1, w2, 1.0 - alpha, alpha))
}

/// Spherical interpolation along the great arc between the flattened
/// tensors: sin((1-a)t)/sin(t) * w1 + sin(a*t)/sin(t) * w2, with t the
/// angle between them. Falls back to lerp when the angle or either norm
/// is degenerate (sin(t) < epsilon or a norm < epsilon).
pub fn slerp_tensor(w1: &Tensor, w2: &Tensor, alpha: f64, epsilon: f64) -> Result<Tensor> {
    check_compatible(w1, w2)?;
    let a = w1.to_f32_vec();
    let b = w2.to_f32_vec();

    let mut dot = 0.0f64;
    let mut norm1_sq = 0.0f64;
    let mut norm2_sq = 0.0f64;
    for (&x, &y) in a.iter().zip(&b) {
        dot += x as f64 * y as f64;
        norm1_sq += x as f64 * x as f64;
        norm2_sq += y as f64 * y as f64;
    }
    let norm1 = norm1_sq.sqrt();
    let norm2 = norm2_sq.sqrt();
    if norm1 < epsilon || norm2 < epsilon {
        return lerp_tensor(w1, w2, alpha);
    }
    let theta = (dot / (norm1 * norm2)).clamp(-1.0, 1.0).acos();
    let sin_theta = theta.sin();
    if sin_theta < epsilon {
        return lerp_tensor(w1, w2, alpha);
    }
    let c1 = (((1.0 - alpha) * theta).sin() / sin_theta) as f32;
    let c2 = ((alpha * theta).sin() / sin_theta) as f32;
    Ok(combine(w1, w2, c1, c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeMethod {
    Lerp,
    Slerp,
}

impl FromStr for MergeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lerp" => Ok(MergeMethod::Lerp),
            "slerp" => Ok(MergeMethod::Slerp),
            other => Err(Error::InvalidParam(format!(
                "unknown merge method {other:?}"
            ))),
        }
    }
}

impl fmt::Display for MergeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MergeMethod::Lerp => "lerp",
            MergeMethod::Slerp => "slerp",
        })
    }
}

/// Merge parameters. `alpha` is the weight on the second (backbone)
/// checkpoint. `preserve_patterns` are name globs (`*` and `?`) copied
/// verbatim from the first checkpoint; tensor key names are architecture
/// specific, so real runs must state them explicitly.
#[derive(Debug, Clone)]
pub struct MergeSpec {
    pub method: MergeMethod,
    pub alpha: f64,
    pub preserve_patterns: Vec<String>,
    pub epsilon: f64,
}

impl MergeSpec {
    pub fn new(method: MergeMethod, alpha: f64) -> Self {
        MergeSpec {
            method,
            alpha,
            preserve_patterns: vec!["vision_tower.*".to_string(), "mm_projector.*".to_string()],
            epsilon: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && (0.0..=1.0).contains(&self.alpha)) {
            return Err(Error::InvalidParam(format!(
                "alpha {} outside [0,1]",
                self.alpha
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParam(
                "epsilon must be a small positive real".into(),
            ));
        }
        Ok(())
    }
}

/// Glob match over chars: `*` any run, `?` any single char.
pub fn glob_match(pattern: &str, name: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let n: Vec<char> = name.chars().collect();
    let (mut pi, mut ni) = (0usize, 0usize);
    let mut star: Option<(usize, usize)> = None;
    while ni < n.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == n[ni]) {
            pi += 1;
            ni += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ni));
            pi += 1;
        } else if let Some((star_pi, star_ni)) = star {
            pi = star_pi + 1;
            ni = star_ni + 1;
            star = Some((star_pi, star_ni + 1));
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}

/// A model checkpoint: uniquely named tensors in deterministic
/// (lexicographic) order plus a string metadata map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Checkpoint {
    pub tensors: BTreeMap<String, Tensor>,
    pub metadata: BTreeMap<String, String>,
}

impl Checkpoint {
    pub fn insert(&mut self, tensor: Tensor) {
        self.tensors.insert(tensor.name.clone(), tensor);
    }

    /// SHA-256 over the canonical serialized form, hex encoded.
    pub fn digest(&self) -> String {
        use sha2::Digest;

        struct HashSink(sha2::Sha256);
        impl std::io::Write for HashSink {
            fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
                self.0.update(buf);
                Ok(buf.len())
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }

        let mut sink = HashSink(sha2::Sha256::new());
        format::write_checkpoint_to(self, &mut sink).expect("hashing cannot fail");
        let digest = sink.0.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Merges the visually instructed checkpoint with the backbone. Tensors
/// matching a preserve pattern are byte-copied from the instructed model;
/// every other instructed tensor is interpolated with its backbone
/// counterpart. Backbone tensors absent from the instructed checkpoint
/// are ignored with a warning.
pub fn merge_checkpoints(
    instructed: &Checkpoint,
    backbone: &Checkpoint,
    spec: &MergeSpec,
) -> Result<Checkpoint> {
    spec.validate()?;

    let preserved = |name: &str| spec.preserve_patterns.iter().any(|p| glob_match(p, name));

    let missing: Vec<String> = instructed
        .tensors
        .keys()
        .filter(|name| !preserved(name) && !backbone.tensors.contains_key(*name))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingTensors(missing));
    }

    for name in backbone.tensors.keys() {
        if !instructed.tensors.contains_key(name) {
            log::warn!("backbone tensor {name} has no instructed counterpart; ignored");
        }
    }

    let mut merged = Checkpoint::default();
    for (name, tensor) in &instructed.tensors {
        if preserved(name) {
            merged.insert(tensor.clone());
            continue;
        }
        let counterpart = &backbone.tensors[name];
        let combined = match spec.method {
            MergeMethod::Lerp => lerp_tensor(tensor, counterpart, spec.alpha)?,
            MergeMethod::Slerp => slerp_tensor(tensor, counterpart, spec.alpha, spec.epsilon)?,
        };
        merged.insert(combined);
    }

    merged
        .metadata
        .insert("merge.method".into(), spec.method.to_string());
    merged
        .metadata
        .insert("merge.alpha".into(), spec.alpha.to_string());
    merged
        .metadata
        .insert("merge.epsilon".into(), spec.epsilon.to_string());
    merged
        .metadata
        .insert("merge.instructed_digest".into(), instructed.digest());
    merged
        .metadata
        .insert("merge.backbone_digest".into(), backbone.digest());
    Ok(merged)
}
