//! Closed-form quantities of complex Randers (`F = α + |β|`) and Kropina
//! (`F = α²/|β|`) metrics, evaluated from first derivatives of `a` and `b`.

use crate::ad::{expand, Group, Shape};
use crate::dsl::{Expr, MetricKind, MetricSpec};
use crate::error::{Error, Result};
use crate::sample::TangentSample;
use crate::tensor::{HermitianMatrix, Tensor, C, ZERO};

/// `|δ|` below this makes the weakly Kähler criterion undefined.
pub const DELTA_FLOOR: f64 = 1e-10;

/// Data shared by both (α,β) families at one sample.
#[derive(Clone, Debug)]
pub struct AlphaBetaAux {
    pub n: usize,
    pub eta: Vec<C>,
    pub eta_bar: Vec<C>,
    /// `a_{i j̄}` at `[i, j]`.
    pub a: Tensor,
    /// `a^{j̄ i}` at `[j, i]`.
    pub a_inv: Tensor,
    /// `∂a_{i j̄}/∂z^k` at `[i, j, k]`.
    pub da: Tensor,
    pub b: Vec<C>,
    /// `∂b_i/∂z^k` at `[i, k]`.
    pub db: Tensor,
    /// `∂b_{r̄}/∂z^j = ∂ conj(b_r)/∂z^j` at `[r, j]`.
    pub db_conj: Tensor,
    /// `b^i = a^{j̄ i} b_{j̄}`.
    pub b_up: Vec<C>,
    /// `∂ b̄^r/∂z^j` at `[r, j]`, where `b̄^r = conj(b^r)`.
    pub db_up_bar: Tensor,
    pub b_norm2: f64,
    /// `l_i = a_{i j̄} η̄^j`.
    pub l: Vec<C>,
    pub alpha: f64,
    pub beta: C,
    /// `aN^k_j = a^{m̄ k} (∂a_{l m̄}/∂z^j) η^l` at `[k, j]`.
    pub a_n: Tensor,
    pub a_spray: Vec<C>,
}

fn sum(n: usize, f: impl Fn(usize) -> C) -> C {
    (0..n).map(f).sum()
}

fn ab_parts(spec: &MetricSpec) -> Result<(&Vec<Vec<Expr>>, &Vec<Expr>)> {
    match &spec.kind {
        MetricKind::Randers { a, b } | MetricKind::Kropina { a, b } => Ok((a, b)),
        other => Err(Error::Kind {
            expected: "randers or kropina".into(),
            found: other.tag().into(),
        }),
    }
}

impl AlphaBetaAux {
    pub fn compute(spec: &MetricSpec, s: &TangentSample) -> Result<AlphaBetaAux> {
        let (a_ex, b_ex) = ab_parts(spec)?;
        let n = spec.dim;
        let shape = Shape::new(1, 1);
        let mut a = Tensor::zeros(n, 2);
        let mut da = Tensor::zeros(n, 3);
        for i in 0..n {
            for j in 0..n {
                let jet = expand(&a_ex[i][j], s, shape)?;
                a[[i, j]] = jet.value();
                for k in 0..n {
                    da[[i, j, k]] = jet.derivative(Group::Z, k).value();
                }
            }
        }
        let mut b = vec![ZERO; n];
        let mut db = Tensor::zeros(n, 2);
        let mut db_conj = Tensor::zeros(n, 2);
        for i in 0..n {
            let jet = expand(&b_ex[i], s, shape)?;
            b[i] = jet.value();
            for k in 0..n {
                db[[i, k]] = jet.derivative(Group::Z, k).value();
                db_conj[[i, k]] = jet.derivative(Group::ZBar, k).value().conj();
            }
        }
        let a_inv = HermitianMatrix::from_tensor(a.clone()).invert()?.0;
        let eta = s.eta.clone();
        let eta_bar: Vec<C> = eta.iter().map(|e| e.conj()).collect();
        let b_up: Vec<C> = (0..n).map(|i| sum(n, |j| a_inv[[j, i]] * b[j].conj())).collect();
        // b̄^r = a^{r̄ j} b_j, so ∂_k b̄^r = ∂_k(a^{-1})[r][j] b_j + a^{-1}[r][j] ∂_k b_j
        // with ∂(a^{-1}) = −a^{-1} (∂a) a^{-1}.
        let db_up_bar = Tensor::from_fn(n, 2, |ix| {
            let (r, k) = (ix[0], ix[1]);
            sum(n, |j| {
                let d_inv = -sum(n, |p| sum(n, |q| a_inv[[r, p]] * da[[p, q, k]] * a_inv[[q, j]]));
                d_inv * b[j] + a_inv[[r, j]] * db[[j, k]]
            })
        });
        let b_norm2 = sum(n, |i| b_up[i] * b[i]).re;
        let l: Vec<C> = (0..n).map(|i| sum(n, |j| a[[i, j]] * eta_bar[j])).collect();
        let alpha = sum(n, |i| l[i] * eta[i]).re.sqrt();
        let beta = sum(n, |i| b[i] * eta[i]);
        let a_n = Tensor::from_fn(n, 2, |ix| {
            let (k, j) = (ix[0], ix[1]);
            sum(n, |m| a_inv[[m, k]] * sum(n, |l| da[[l, m, j]] * eta[l]))
        });
        let a_spray = (0..n).map(|i| sum(n, |j| a_n[[i, j]] * eta[j]) * 0.5).collect();
        Ok(AlphaBetaAux {
            n,
            eta,
            eta_bar,
            a,
            a_inv,
            da,
            b,
            db,
            db_conj,
            b_up,
            db_up_bar,
            b_norm2,
            l,
            alpha,
            beta,
            a_n,
            a_spray,
        })
    }

    fn abs_beta(&self) -> f64 {
        self.beta.norm()
    }

    /// `β̄ l_{r̄} ∂b̄^r/∂z^j + β (∂b_{r̄}/∂z^j) η̄^r` for each `j`.
    pub fn gb_vector(&self) -> Vec<C> {
        let n = self.n;
        (0..n)
            .map(|j| {
                self.beta.conj() * sum(n, |r| self.l[r].conj() * self.db_up_bar[[r, j]])
                    + self.beta * sum(n, |r| self.db_conj[[r, j]] * self.eta_bar[r])
            })
            .collect()
    }

    /// The generalized Berwald scalar: `gb_vector` contracted with `η`.
    pub fn gb_scalar(&self) -> C {
        let v = self.gb_vector();
        sum(self.n, |j| v[j] * self.eta[j])
    }

    /// Strong torsion of `α`: `∂a_{p j̄}/∂z^k − ∂a_{k j̄}/∂z^p`.
    pub fn alpha_torsion(&self) -> Tensor {
        let da = &self.da;
        Tensor::from_fn(self.n, 3, |ix| da[[ix[0], ix[1], ix[2]]] - da[[ix[2], ix[1], ix[0]]])
    }

    fn bracket(&self, j: usize) -> C {
        let n = self.n;
        let b2 = self.beta * self.beta / self.beta.norm_sqr();
        sum(n, |r| {
            self.l[r].conj() * self.db_up_bar[[r, j]] - b2 * self.db_conj[[r, j]] * self.eta_bar[r]
        })
    }
}

/// Randers auxiliaries at one sample.
#[derive(Clone, Debug)]
pub struct RandersAux {
    pub base: AlphaBetaAux,
    pub f: f64,
    pub gamma: f64,
    pub xi: Vec<C>,
    /// `k^{r̄ i}` at `[r, i]`.
    pub k: Tensor,
}

impl RandersAux {
    pub fn compute(spec: &MetricSpec, s: &TangentSample) -> Result<RandersAux> {
        if !matches!(spec.kind, MetricKind::Randers { .. }) {
            return Err(Error::Kind {
                expected: "randers".into(),
                found: spec.kind.tag().into(),
            });
        }
        let base = AlphaBetaAux::compute(spec, s)?;
        let n = base.n;
        let (alpha, ab) = (base.alpha, base.abs_beta());
        let f = alpha + ab;
        let l_val = f * f;
        let a2 = alpha * alpha;
        let gamma = l_val + a2 * (base.b_norm2 - 1.0);
        let xi = (0..n)
            .map(|i| base.beta.conj() * base.eta[i] + base.b_up[i] * a2)
            .collect();
        let (eta, eta_bar, b_up) = (&base.eta, &base.eta_bar, &base.b_up);
        let k = Tensor::from_fn(n, 2, |ix| {
            let (r, i) = (ix[0], ix[1]);
            let bbar_r = b_up[r].conj();
            base.a_inv[[r, i]] * (2.0 * alpha) + eta[i] * eta_bar[r] * (2.0 * (alpha * base.b_norm2 + 2.0 * ab) / gamma)
                - b_up[i] * bbar_r * (2.0 * alpha.powi(3) / gamma)
                - (base.beta.conj() * eta[i] * bbar_r + base.beta * b_up[i] * eta_bar[r]) * (2.0 * alpha / gamma)
        });
        Ok(RandersAux { base, f, gamma, xi, k })
    }

    /// `η_i = (F/α) l_i + (F β̄/|β|) b_i`.
    pub fn eta_lower(&self) -> Vec<C> {
        let b = &self.base;
        let ab = b.abs_beta();
        (0..b.n)
            .map(|i| b.l[i] * (self.f / b.alpha) + b.beta.conj() * b.b[i] * (self.f / ab))
            .collect()
    }

    /// `N^i_j` from `aN`, `γ`, `ξ` and `k`.
    pub fn nonlinear_connection(&self) -> Tensor {
        let b = &self.base;
        let n = b.n;
        let phase = b.beta / b.abs_beta();
        Tensor::from_fn(n, 2, |ix| {
            let (i, j) = (ix[0], ix[1]);
            b.a_n[[i, j]]
                + b.bracket(j) * self.xi[i] / self.gamma
                + phase * 0.5 * sum(n, |r| self.k[[r, i]] * b.db_conj[[r, j]])
        })
    }

    pub fn spray(&self) -> Vec<C> {
        let b = &self.base;
        let n = b.n;
        let phase = b.beta / b.abs_beta();
        (0..n)
            .map(|i| {
                b.a_spray[i]
                    + sum(n, |j| b.bracket(j) * b.eta[j]) * self.xi[i] / (2.0 * self.gamma)
                    + phase * 0.25 * sum(n, |j| sum(n, |r| self.k[[r, i]] * b.db_conj[[r, j]]) * b.eta[j])
            })
            .collect()
    }

    /// `δ = (α²‖b‖² − |β|²)/2γ − n|β|/2F`.
    pub fn delta(&self) -> f64 {
        let b = &self.base;
        let ab = b.abs_beta();
        (b.alpha * b.alpha * b.b_norm2 - ab * ab) / (2.0 * self.gamma) - b.n as f64 * ab / (2.0 * self.f)
    }

    /// Left side of the weakly Kähler criterion, indexed by `k`.
    pub fn weakly_kahler_vector(&self) -> Result<Vec<C>> {
        let b = &self.base;
        let n = b.n;
        let delta = self.delta();
        if delta.abs() < DELTA_FLOOR {
            return Err(Error::DegenerateDelta(delta));
        }
        let (alpha, ab) = (b.alpha, b.abs_beta());
        let (eta, eta_bar) = (&b.eta, &b.eta_bar);
        let b_up_bar: Vec<C> = b.b_up.iter().map(|x| x.conj()).collect();
        let c_vec: Vec<C> = (0..n)
            .map(|k| (b.l[k] / (alpha * alpha) - b.beta.conj() * b.b[k] / (ab * ab)) * delta)
            .collect();
        let bracket = sum(n, |r| {
            let t1 = b.beta * ((alpha * b.b_norm2 + ab) / ab) * sum(n, |m| b.db_conj[[m, r]] * eta_bar[m]);
            let t2 = b.beta.conj()
                * sum(n, |l| {
                    (b.db[[r, l]] - sum(n, |m| b_up_bar[m] * b.da[[l, m, r]])) * eta[l]
                });
            let t3 = -sum(n, |m| b_up_bar[m] * b.db_conj[[m, r]]) * (alpha * ab);
            (t1 + t2 + t3) * eta[r]
        });
        let pre = alpha * alpha * ab / (self.gamma * delta);
        // Γ^{r̄}_{j̄ k} = ½ a^{r̄ p}(∂a_{p j̄}/∂z^k − ∂a_{k j̄}/∂z^p).
        let christoffel =
            |r: usize, j: usize, k: usize| sum(n, |p| b.a_inv[[r, p]] * (b.da[[p, j, k]] - b.da[[k, j, p]])) * 0.5;
        let tail = sum(n, |m| sum(n, |r| b.db_conj[[m, r]] * eta_bar[m] * eta[r]));
        Ok((0..n)
            .map(|k| {
                let middle = sum(n, |l| {
                    let f_kl = b.db[[l, k]] - b.db[[k, l]];
                    let gam = sum(n, |r| b.a[[l, r]] * sum(n, |j| christoffel(r, j, k) * eta_bar[j]));
                    (b.beta.conj() * f_kl * alpha
                        + b.b[l] * sum(n, |r| b.db_conj[[r, k]] * eta_bar[r]) * alpha
                        + gam * (2.0 * ab))
                        * eta[l]
                });
                bracket * c_vec[k] * pre - middle + b.b[k] * tail * alpha
            })
            .collect())
    }
}

/// Kropina auxiliaries at one sample.
#[derive(Clone, Debug)]
pub struct KropinaAux {
    pub base: AlphaBetaAux,
    pub q: f64,
    /// `t^{r̄ i}` at `[r, i]`.
    pub t: Tensor,
}

impl KropinaAux {
    pub fn compute(spec: &MetricSpec, s: &TangentSample) -> Result<KropinaAux> {
        if !matches!(spec.kind, MetricKind::Kropina { .. }) {
            return Err(Error::Kind {
                expected: "kropina".into(),
                found: spec.kind.tag().into(),
            });
        }
        let base = AlphaBetaAux::compute(spec, s)?;
        let ab = base.abs_beta();
        if ab <= crate::dsl::metric::BETA_FLOOR {
            return Err(Error::Domain {
                expr: "abs2(beta)".into(),
            });
        }
        let n = base.n;
        let q = base.alpha / ab;
        let (q2, ab2) = (q * q, ab * ab);
        let (eta, eta_bar, b_up) = (&base.eta, &base.eta_bar, &base.b_up);
        let t = Tensor::from_fn(n, 2, |ix| {
            let (r, i) = (ix[0], ix[1]);
            base.a_inv[[r, i]]
                + eta[i] * eta_bar[r] * ((2.0 - q2 * base.b_norm2) / (q2 * ab2))
                + (base.beta.conj() * eta[i] * b_up[r].conj() - base.beta * b_up[i] * eta_bar[r]) / ab2
        });
        Ok(KropinaAux { base, q, t })
    }

    /// `η_i = 2q² l_i − q⁴ β̄ b_i`.
    pub fn eta_lower(&self) -> Vec<C> {
        let b = &self.base;
        let q2 = self.q * self.q;
        (0..b.n)
            .map(|i| b.l[i] * (2.0 * q2) - b.beta.conj() * b.b[i] * (q2 * q2))
            .collect()
    }

    fn lead(&self, j: usize) -> C {
        let b = &self.base;
        sum(b.n, |r| b.l[r].conj() * b.db_up_bar[[r, j]])
    }

    pub fn nonlinear_connection(&self) -> Tensor {
        let b = &self.base;
        let n = b.n;
        let ab2 = b.beta.norm_sqr();
        let q2 = self.q * self.q;
        Tensor::from_fn(n, 2, |ix| {
            let (i, j) = (ix[0], ix[1]);
            b.a_n[[i, j]]
                - b.beta.conj() / ab2 * self.lead(j) * b.eta[i]
                - b.beta * (q2 / 2.0) * sum(n, |r| self.t[[r, i]] * b.db_conj[[r, j]])
        })
    }

    pub fn spray(&self) -> Vec<C> {
        let b = &self.base;
        let n = b.n;
        let ab2 = b.beta.norm_sqr();
        let q2 = self.q * self.q;
        (0..n)
            .map(|i| {
                b.a_spray[i]
                    - b.beta.conj() / (2.0 * ab2) * sum(n, |j| self.lead(j) * b.eta[j]) * b.eta[i]
                    - b.beta * (q2 / 4.0) * sum(n, |j| sum(n, |r| self.t[[r, i]] * b.db_conj[[r, j]]) * b.eta[j])
            })
            .collect()
    }
}
