//! Dense complex tensors with every dimension equal to `n`, and the
//! Hermitian linear algebra used on fundamental tensors.
//!
//! Index conventions: a rank-2 metric `g[[i, j]]` is `g_{i j̄}` (row
//! unbarred, column barred); its inverse stores `g^{j̄ i}` at `[[j, i]]`.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};

pub type C = Complex64;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    n: usize,
    rank: usize,
    data: Vec<C>,
}

/// Cartan-type tensor `C_{i j̄ k}` stored at `[i, j, k]`.
pub type Tensor3 = Tensor;
/// Cartan-type tensor `C_{i j̄ k̄}` stored at `[i, j, k]`.
pub type Tensor3Bar = Tensor;
/// Coefficients with one upper index, `X^i_{jk}` stored at `[i, j, k]`.
pub type MixedCoeffs = Tensor;
pub type Tensor4 = Tensor;

impl Tensor {
    pub fn zeros(n: usize, rank: usize) -> Tensor {
        Tensor {
            n,
            rank,
            data: vec![ZERO; n.pow(rank as u32)],
        }
    }

    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> C) -> Tensor {
        let mut t = Tensor::zeros(n, rank);
        let mut idx = vec![0usize; rank];
        for slot in 0..t.data.len() {
            let mut r = slot;
            for d in (0..rank).rev() {
                idx[d] = r % n;
                r /= n;
            }
            t.data[slot] = f(&idx);
        }
        t
    }

    pub fn vector(v: &[C]) -> Tensor {
        Tensor {
            n: v.len(),
            rank: 1,
            data: v.to_vec(),
        }
    }

    pub fn identity(n: usize) -> Tensor {
        Tensor::from_fn(n, 2, |ix| if ix[0] == ix[1] { ONE } else { ZERO })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> C {
        self.data[self.offset(idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(C) -> C) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip(&self, other: &Tensor, f: impl Fn(C, C) -> C) -> Result<Tensor> {
        if self.n != other.n || self.rank != other.rank {
            return Err(Error::Shape(format!(
                "rank {} dim {} vs rank {} dim {}",
                self.rank, self.n, other.rank, other.n
            )));
        }
        Ok(Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        self.zip(other, |a, b| a - b).expect("matching shapes")
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        self.zip(other, |a, b| a + b).expect("matching shapes")
    }

    pub fn scale(&self, s: C) -> Tensor {
        self.map(|z| z * s)
    }

    pub fn conj(&self) -> Tensor {
        self.map(|z| z.conj())
    }

    /// Reorders slots: output index `out` reads input at `idx[perm[k]] = out[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.rank);
        let mut src = vec![0usize; self.rank];
        Tensor::from_fn(self.n, self.rank, |out| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = out[k];
            }
            self.get(&src)
        })
    }

    /// Sums `slot` against `v`, removing that slot.
    pub fn contract(&self, slot: usize, v: &[C]) -> Result<Tensor> {
        if slot >= self.rank {
            return Err(Error::Shape(format!("slot {} of a rank-{} tensor", slot, self.rank)));
        }
        if v.len() != self.n {
            return Err(Error::Shape(format!(
                "vector of length {} against dimension {}",
                v.len(),
                self.n
            )));
        }
        let mut full = vec![0usize; self.rank];
        Ok(Tensor::from_fn(self.n, self.rank - 1, |idx| {
            full[..slot].copy_from_slice(&idx[..slot]);
            full[slot + 1..].copy_from_slice(&idx[slot..]);
            let mut s = ZERO;
            for (k, &vk) in v.iter().enumerate() {
                full[slot] = k;
                s += self.get(&full) * vk;
            }
            s
        }))
    }

    /// Matrix product for rank-2 tensors.
    pub fn matmul(&self, other: &Tensor) -> Tensor {
        assert!(self.rank == 2 && other.rank == 2 && self.n == other.n);
        let n = self.n;
        Tensor::from_fn(n, 2, |ix| (0..n).map(|k| self[[ix[0], k]] * other[[k, ix[1]]]).sum())
    }

    pub fn adjoint(&self) -> Tensor {
        assert_eq!(self.rank, 2);
        Tensor::from_fn(self.n, 2, |ix| self[[ix[1], ix[0]]].conj())
    }

    /// Nested JSON arrays with complex entries as `[re, im]`.
    pub fn to_json(&self) -> Value {
        fn rec(t: &Tensor, prefix: &mut Vec<usize>) -> Value {
            if prefix.len() == t.rank {
                let z = t.get(prefix);
                return Value::from(vec![z.re, z.im]);
            }
            let mut out = Vec::with_capacity(t.n);
            for i in 0..t.n {
                prefix.push(i);
                out.push(rec(t, prefix));
                prefix.pop();
            }
            Value::Array(out)
        }
        rec(self, &mut Vec::new())
    }
}

macro_rules! fixed_index {
    ($($r:literal),*) => {$(
        impl Index<[usize; $r]> for Tensor {
            type Output = C;
            fn index(&self, idx: [usize; $r]) -> &C {
                let o = self.offset(&idx);
                &self.data[o]
            }
        }
        impl IndexMut<[usize; $r]> for Tensor {
            fn index_mut(&mut self, idx: [usize; $r]) -> &mut C {
                let o = self.offset(&idx);
                &mut self.data[o]
            }
        }
    )*};
}
fixed_index!(1, 2, 3, 4);

/// Hermitian matrix `g_{i j̄}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(pub Tensor);

impl HermitianMatrix {
    /// Wraps `m`, replacing it by its Hermitian part.
    pub fn from_tensor(m: Tensor) -> HermitianMatrix {
        assert_eq!(m.rank(), 2);
        let sym = m.add(&m.adjoint()).scale(C::new(0.5, 0.0));
        HermitianMatrix(sym)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    /// `A = L D L*` with `L` unit lower triangular; fails on a pivot below
    /// `1e-10 * trace / n`.
    pub fn ldl(&self) -> Result<(Tensor, Vec<f64>)> {
        let n = self.n();
        let a = &self.0;
        let trace: f64 = (0..n).map(|i| a[[i, i]].re).sum();
        let floor = 1e-10 * trace.abs() / n as f64;
        let mut l = Tensor::identity(n);
        let mut d = vec![0.0; n];
        for j in 0..n {
            let mut dj = a[[j, j]].re;
            for k in 0..j {
                dj -= l[[j, k]].norm_sqr() * d[k];
            }
            if !(dj > floor) || !dj.is_finite() {
                return Err(Error::SingularMatrix(format!(
                    "pivot {} is {:e} (floor {:e})",
                    j, dj, floor
                )));
            }
            d[j] = dj;
            for i in j + 1..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]].conj() * d[k];
                }
                l[[i, j]] = s / dj;
            }
        }
        Ok((l, d))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.ldl().is_ok()
    }

    /// Inverse, stored so that `inv[[j, i]] = g^{j̄ i}`.
    pub fn invert(&self) -> Result<HermitianMatrix> {
        let n = self.n();
        let (l, d) = self.ldl()?;
        let mut inv = Tensor::zeros(n, 2);
        for col in 0..n {
            // L y = e_col
            let mut y = vec![ZERO; n];
            for i in 0..n {
                let mut s = if i == col { ONE } else { ZERO };
                for k in 0..i {
                    s -= l[[i, k]] * y[k];
                }
                y[i] = s;
            }
            for (yi, di) in y.iter_mut().zip(&d) {
                *yi /= di;
            }
            // L* x = y
            let mut x = vec![ZERO; n];
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in i + 1..n {
                    s -= l[[k, i]].conj() * x[k];
                }
                x[i] = s;
            }
            for i in 0..n {
                inv[[i, col]] = x[i];
            }
        }
        let norm1 = |m: &Tensor| {
            (0..n)
                .map(|j| (0..n).map(|i| m[[i, j]].norm()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let cond = norm1(&self.0) * norm1(&inv);
        if !(cond <= 1e12) {
            return Err(Error::SingularMatrix(format!("condition estimate {:e}", cond)));
        }
        Ok(HermitianMatrix::from_tensor(inv))
    }
}

/// Scale-aware deviation: `max |a - b| / (1 + max |entries|)` over the
/// tensors entering an identity.
pub fn scaled_residual(diff: &Tensor, inputs: &[&Tensor]) -> f64 {
    let scale = inputs.iter().map(|t| t.max_abs()).fold(0.0, f64::max);
    diff.max_abs() / (1.0 + scale)
}
