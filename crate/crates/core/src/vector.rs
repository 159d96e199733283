//! Dense `f64` vector helpers shared by pooling, directions and features.

use crate::{Error, Result};

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, clamped to `[-1, 1]`.
///
/// `label` names the operands in a [`Error::DegenerateVector`] error.
pub fn cosine_labeled(u: &[f64], v: &[f64], label: &str) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            left: u.len(),
            right: v.len(),
        });
    }
    let nu = norm(u);
    if nu == 0.0 || !nu.is_finite() {
        return Err(Error::DegenerateVector(format!("{label} (left operand)")));
    }
    let nv = norm(v);
    if nv == 0.0 || !nv.is_finite() {
        return Err(Error::DegenerateVector(format!("{label} (right operand)")));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    cosine_labeled(u, v, "vector")
}

/// Accumulate `v` into `acc`.
pub fn add_assign(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

pub fn scale_in_place(v: &mut [f64], factor: f64) {
    for x in v {
        *x *= factor;
    }
}

/// Arithmetic mean of equally sized vectors, summed in iteration order.
pub fn mean<'a, I>(vectors: I, dim: usize) -> Option<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc = vec![0.0; dim];
    let mut count = 0usize;
    for v in vectors {
        add_assign(&mut acc, v);
        count += 1;
    }
    if count == 0 {
        return None;
    }
    scale_in_place(&mut acc, 1.0 / count as f64);
    Some(acc)
}

pub fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|x| *x == 0.0)
}
