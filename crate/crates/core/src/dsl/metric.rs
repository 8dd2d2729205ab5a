use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::{Expr, Func, Var};
use super::parse::parse;
use crate::error::{Error, Result};
use crate::sample::{generate, SamplePlan, TangentSample};
use crate::tensor::Tensor;

/// Seed of the validation sample drawn when a metric is loaded.
pub const VALIDATION_SEED: u64 = 20_240_601;
pub const VALIDATION_POINTS: usize = 16;
/// Samples with `|β|` below this are rejected for Randers and Kropina metrics.
pub const BETA_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    Hermitian { a: Vec<Vec<Expr>> },
    Randers { a: Vec<Vec<Expr>>, b: Vec<Expr> },
    Kropina { a: Vec<Vec<Expr>>, b: Vec<Expr> },
    AntonelliShimada { sigma: Expr },
    Custom { l: Expr },
}

impl MetricKind {
    pub fn tag(&self) -> &'static str {
        match self {
            MetricKind::Hermitian { .. } => "hermitian",
            MetricKind::Randers { .. } => "randers",
            MetricKind::Kropina { .. } => "kropina",
            MetricKind::AntonelliShimada { .. } => "antonelli_shimada",
            MetricKind::Custom { .. } => "custom",
        }
    }

    /// The Hermitian matrix `a` of an (α,β) or purely Hermitian metric.
    pub fn a_matrix(&self) -> Option<&Vec<Vec<Expr>>> {
        match self {
            MetricKind::Hermitian { a } | MetricKind::Randers { a, .. } | MetricKind::Kropina { a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn b_vector(&self) -> Option<&Vec<Expr>> {
        match self {
            MetricKind::Randers { b, .. } | MetricKind::Kropina { b, .. } => Some(b),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub dim: usize,
    pub kind: MetricKind,
    pub base_point: Vec<Complex64>,
}

/// On-disk metric description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    pub name: String,
    pub dimension: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Vec<f64>>,
}

fn parse_field(text: &str, field: String, dim: usize) -> Result<Expr> {
    let e = parse(text).map_err(|e| e.in_field(field.clone()))?;
    e.check_bound(dim, dim).map_err(|e| e.in_field(field))?;
    Ok(e)
}

fn position_only(e: Expr, field: &str) -> Result<Expr> {
    if e.mentions_eta() {
        return Err(Error::Schema(format!("`{}` may depend on z only", field)));
    }
    Ok(e)
}

fn parse_matrix(rows: &[Vec<String>], dim: usize) -> Result<Vec<Vec<Expr>>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Schema(format!("`a` must be a {0}x{0} array", dim)));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, t)| {
                    let f = format!("a[{}][{}]", i, j);
                    position_only(parse_field(t, f.clone(), dim)?, &f)
                })
                .collect()
        })
        .collect()
}

fn parse_vector(items: &[String], dim: usize) -> Result<Vec<Expr>> {
    if items.len() != dim {
        return Err(Error::Schema(format!("`b` must have {} entries", dim)));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let f = format!("b[{}]", i);
            position_only(parse_field(t, f.clone(), dim)?, &f)
        })
        .collect()
}

impl MetricFile {
    /// Parses the payload into an unvalidated spec.
    pub fn to_spec(&self) -> Result<MetricSpec> {
        let n = self.dimension;
        if n < 2 {
            return Err(Error::Schema("dimension must be at least 2".into()));
        }
        let present = [
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("sigma", self.sigma.is_some()),
            ("L", self.l.is_some()),
        ];
        let allowed: &[&str] = match self.kind.as_str() {
            "hermitian" => &["a"],
            "randers" | "kropina" => &["a", "b"],
            "antonelli_shimada" => &["sigma"],
            "custom" => &["L"],
            other => return Err(Error::Schema(format!("unknown kind `{}`", other))),
        };
        for (field, has) in present {
            if has != allowed.contains(&field) {
                return Err(Error::Schema(if has {
                    format!("field `{}` is not used by kind `{}`", field, self.kind)
                } else {
                    format!("kind `{}` requires field `{}`", self.kind, field)
                }));
            }
        }
        let kind = match self.kind.as_str() {
            "hermitian" => MetricKind::Hermitian {
                a: parse_matrix(self.a.as_ref().expect("checked"), n)?,
            },
            "randers" => MetricKind::Randers {
                a: parse_matrix(self.a.as_ref().expect("checked"), n)?,
                b: parse_vector(self.b.as_ref().expect("checked"), n)?,
            },
            "kropina" => MetricKind::Kropina {
                a: parse_matrix(self.a.as_ref().expect("checked"), n)?,
                b: parse_vector(self.b.as_ref().expect("checked"), n)?,
            },
            "antonelli_shimada" => {
                if n != 2 {
                    return Err(Error::Schema("antonelli_shimada requires dimension 2".into()));
                }
                let s = self.sigma.as_ref().expect("checked");
                MetricKind::AntonelliShimada {
                    sigma: position_only(parse_field(s, "sigma".into(), n)?, "sigma")?,
                }
            }
            _ => MetricKind::Custom {
                l: parse_field(self.l.as_ref().expect("checked"), "L".into(), n)?,
            },
        };
        let base_point = match &self.base_point {
            None => vec![Complex64::new(0.0, 0.0); n],
            Some(v) if v.len() == 2 * n => v.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect(),
            Some(v) => {
                return Err(Error::Schema(format!(
                    "base_point needs {} reals, got {}",
                    2 * n,
                    v.len()
                )))
            }
        };
        Ok(MetricSpec {
            name: self.name.clone(),
            dim: n,
            kind,
            base_point,
        })
    }
}

/// Parses and validates a metric JSON document.
pub fn load_metric(json: &str) -> Result<MetricSpec> {
    let file: MetricFile = serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
    let spec = file.to_spec()?;
    spec.validate()?;
    Ok(spec)
}

fn hermitian_form(a: &[Vec<Expr>]) -> Expr {
    let n = a.len();
    Expr::sum((0..n).flat_map(|i| {
        (0..n).map(move |j| {
            Expr::mul(
                a[i][j].clone(),
                Expr::mul(Expr::eta(i), Expr::call(Func::Conj, Expr::eta(j))),
            )
        })
    }))
}

fn beta(b: &[Expr]) -> Expr {
    Expr::sum(b.iter().enumerate().map(|(i, bi)| Expr::mul(bi.clone(), Expr::eta(i))))
}

fn fmt_c(c: Complex64) -> String {
    Expr::Num(c).to_string()
}

impl MetricSpec {
    /// `L = F²` as an expression in `z` and `η`.
    pub fn assemble_l(&self) -> Expr {
        match &self.kind {
            MetricKind::Hermitian { a } => hermitian_form(a),
            MetricKind::Randers { a, b } => {
                let alpha = Expr::call(Func::Sqrt, hermitian_form(a));
                let abs_beta = Expr::call(Func::Sqrt, Expr::call(Func::Abs2, beta(b)));
                Expr::pow(Expr::add(alpha, abs_beta), 2)
            }
            MetricKind::Kropina { a, b } => {
                // α⁴ / |β|², with α² written out rather than as sqrt(..)^2.
                Expr::div(Expr::pow(hermitian_form(a), 2), Expr::call(Func::Abs2, beta(b)))
            }
            MetricKind::AntonelliShimada { sigma } => Expr::mul(
                Expr::call(Func::Exp, Expr::mul(Expr::real(2.0), sigma.clone())),
                Expr::call(
                    Func::Sqrt,
                    Expr::add(
                        Expr::pow(Expr::call(Func::Abs2, Expr::eta(0)), 2),
                        Expr::pow(Expr::call(Func::Abs2, Expr::eta(1)), 2),
                    ),
                ),
            ),
            MetricKind::Custom { l } => l.clone(),
        }
    }

    /// `β = b_i η^i` for (α,β) metrics.
    pub fn beta(&self) -> Option<Expr> {
        self.kind.b_vector().map(|b| beta(b))
    }

    /// The purely Hermitian metric `α²` underlying an (α,β) metric.
    pub fn alpha_spec(&self) -> Option<MetricSpec> {
        match &self.kind {
            MetricKind::Randers { a, .. } | MetricKind::Kropina { a, .. } => Some(MetricSpec {
                name: format!("{}:alpha", self.name),
                dim: self.dim,
                kind: MetricKind::Hermitian { a: a.clone() },
                base_point: self.base_point.clone(),
            }),
            _ => None,
        }
    }

    /// Whether a tangent sample is admissible (η ≠ 0, and |β| bounded
    /// away from zero for (α,β) metrics).
    pub fn admits(&self, s: &TangentSample) -> bool {
        if s.eta_is_zero() {
            return false;
        }
        match self.beta() {
            Some(b) => matches!(b.eval_at(&s.z, &s.eta), Ok(v) if v.norm() > BETA_FLOOR),
            None => true,
        }
    }

    pub fn samples(&self, plan: &SamplePlan) -> Result<crate::sample::SampleSet> {
        generate(plan, &self.base_point, &|s| self.admits(s))
    }

    /// Checks Hermitian symmetry of `a`, realness and positivity of `L`,
    /// and positive definiteness of the fundamental tensor on a fixed
    /// 16-point sample.
    pub fn validate(&self) -> Result<()> {
        let plan = SamplePlan {
            seed: VALIDATION_SEED,
            z_count: VALIDATION_POINTS,
            eta_count: 1,
            radius: 0.5,
        };
        let set = self.samples(&plan).map_err(|_| Error::Validation {
            message: "β vanishes on the whole validation domain".into(),
        })?;
        let l = self.assemble_l();
        for s in set.flat() {
            let witness = format!("z = {:?}, eta = {:?}", s.z, s.eta);
            if let Some(a) = self.kind.a_matrix() {
                #[allow(clippy::needless_range_loop)]
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        let aij = a[i][j].eval_at(&s.z, &s.eta)?;
                        let aji = a[j][i].eval_at(&s.z, &s.eta)?;
                        if (aij - aji.conj()).norm() > 1e-10 * (1.0 + aij.norm()) {
                            return Err(Error::Validation {
                                message: format!("a[{}][{}] is not Hermitian at {}", i, j, witness),
                            });
                        }
                    }
                }
            }
            let lv = l.eval_at(&s.z, &s.eta)?;
            if lv.im.abs() > 1e-10 * (1.0 + lv.norm()) || !(lv.re > 0.0) {
                return Err(Error::Validation {
                    message: format!("L = {} is not real and positive at {}", fmt_c(lv), witness),
                });
            }
            let g = crate::geometry::fundamental_tensor(&l, &s)?;
            if !g.is_positive_definite() {
                return Err(Error::Validation {
                    message: format!("fundamental tensor is not positive definite at {}", witness),
                });
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> MetricFile {
        let m = |a: &Vec<Vec<Expr>>| a.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect();
        let v = |b: &Vec<Expr>| b.iter().map(|e| e.to_string()).collect();
        let mut f = MetricFile {
            name: self.name.clone(),
            dimension: self.dim,
            kind: self.kind.tag().into(),
            a: None,
            b: None,
            sigma: None,
            l: None,
            base_point: Some(self.base_point.iter().flat_map(|c| [c.re, c.im]).collect()),
        };
        match &self.kind {
            MetricKind::Hermitian { a } => f.a = Some(m(a)),
            MetricKind::Randers { a, b } | MetricKind::Kropina { a, b } => {
                f.a = Some(m(a));
                f.b = Some(v(b));
            }
            MetricKind::AntonelliShimada { sigma } => f.sigma = Some(sigma.to_string()),
            MetricKind::Custom { l } => f.l = Some(l.to_string()),
        }
        f
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("metric file serializes")
    }

    /// The same metric kind with `L` multiplied by the constant `c > 0`.
    pub fn scaled(&self, c: f64) -> MetricSpec {
        assert!(c > 0.0);
        let times = |e: &Expr, s: f64| Expr::mul(Expr::real(s), e.clone());
        let scale_a = |a: &Vec<Vec<Expr>>| a.iter().map(|r| r.iter().map(|e| times(e, c)).collect()).collect();
        let scale_b = |b: &Vec<Expr>| b.iter().map(|e| times(e, c.sqrt())).collect();
        let kind = match &self.kind {
            MetricKind::Hermitian { a } => MetricKind::Hermitian { a: scale_a(a) },
            MetricKind::Randers { a, b } => MetricKind::Randers {
                a: scale_a(a),
                b: scale_b(b),
            },
            MetricKind::Kropina { a, b } => MetricKind::Kropina {
                a: scale_a(a),
                b: scale_b(b),
            },
            MetricKind::AntonelliShimada { sigma } => MetricKind::AntonelliShimada {
                sigma: Expr::add(sigma.clone(), Expr::real(c.ln() / 2.0)),
            },
            MetricKind::Custom { l } => MetricKind::Custom { l: times(l, c) },
        };
        MetricSpec {
            name: format!("{}*{}", self.name, c),
            dim: self.dim,
            kind,
            base_point: self.base_point.clone(),
        }
    }

    /// The metric expressed in coordinates `z' = A z`, `η' = A η`.
    pub fn transformed(&self, a: &Tensor) -> Result<MetricSpec> {
        let n = self.dim;
        let inv = invert_general(a)?;
        let inv = &inv;
        let lin = |v: fn(usize) -> Expr, i: usize| Expr::sum((0..n).map(|j| Expr::mul(Expr::num(inv[[i, j]]), v(j))));
        let pull_z = |e: &Expr| {
            e.substitute(&|v| match v {
                Var::Z(i) => Some(lin(Expr::z, i)),
                Var::Eta(_) => None,
            })
        };
        let pull_all = |e: &Expr| {
            e.substitute(&|v| match v {
                Var::Z(i) => Some(lin(Expr::z, i)),
                Var::Eta(i) => Some(lin(Expr::eta, i)),
            })
        };
        // a'_{p q̄} = B_ip a_{i j̄} conj(B_jq), b'_p = b_i B_ip with B = A⁻¹.
        let new_a = |a0: &Vec<Vec<Expr>>| -> Vec<Vec<Expr>> {
            (0..n)
                .map(|p| {
                    (0..n)
                        .map(|q| {
                            Expr::sum((0..n).flat_map(|i| {
                                let pull_z = &pull_z;
                                (0..n).map(move |j| {
                                    let w = inv[[i, p]] * inv[[j, q]].conj();
                                    Expr::mul(Expr::num(w), pull_z(&a0[i][j]))
                                })
                            }))
                        })
                        .collect()
                })
                .collect()
        };
        let new_b = |b0: &Vec<Expr>| -> Vec<Expr> {
            (0..n)
                .map(|p| Expr::sum((0..n).map(|i| Expr::mul(Expr::num(inv[[i, p]]), pull_z(&b0[i])))))
                .collect()
        };
        let kind = match &self.kind {
            MetricKind::Hermitian { a } => MetricKind::Hermitian { a: new_a(a) },
            MetricKind::Randers { a, b } => MetricKind::Randers {
                a: new_a(a),
                b: new_b(b),
            },
            MetricKind::Kropina { a, b } => MetricKind::Kropina {
                a: new_a(a),
                b: new_b(b),
            },
            MetricKind::AntonelliShimada { .. } | MetricKind::Custom { .. } => MetricKind::Custom {
                l: pull_all(&self.assemble_l()),
            },
        };
        let base_point = (0..n)
            .map(|i| (0..n).map(|j| a[[i, j]] * self.base_point[j]).sum())
            .collect();
        Ok(MetricSpec {
            name: format!("{}:transformed", self.name),
            dim: n,
            kind,
            base_point,
        })
    }
}

/// Gauss-Jordan inverse of a general square matrix.
pub fn invert_general(a: &Tensor) -> Result<Tensor> {
    let n = a.n();
    let mut m = a.clone();
    let mut inv = Tensor::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[[x, col]].norm().total_cmp(&m[[y, col]].norm()))
            .expect("non-empty range");
        if m[[pivot, col]].norm() < 1e-14 {
            return Err(Error::SingularMatrix("coordinate change is not invertible".into()));
        }
        for k in 0..n {
            let (t1, t2) = (m[[col, k]], m[[pivot, k]]);
            m[[col, k]] = t2;
            m[[pivot, k]] = t1;
            let (u1, u2) = (inv[[col, k]], inv[[pivot, k]]);
            inv[[col, k]] = u2;
            inv[[pivot, k]] = u1;
        }
        let p = m[[col, col]];
        for k in 0..n {
            m[[col, k]] /= p;
            inv[[col, k]] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[[r, col]];
                for k in 0..n {
                    let (mc, ic) = (m[[col, k]], inv[[col, k]]);
                    m[[r, k]] -= f * mc;
                    inv[[r, k]] -= f * ic;
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const FLAT: &str = r#"{"name":"flat","dimension":2,"kind":"hermitian","a":[["1","0"],["0","1"]]}"#;

    #[test]
    fn flat_file_loads() {
        let spec = load_metric(FLAT).unwrap();
        assert_eq!(spec.dim, 2);
        let l = spec.assemble_l();
        assert_eq!(
            l.eval_at(&[c(0.3, 0.1), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)])
                .unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn randers_norm_of_b() {
        let json = r#"{"name":"r","dimension":2,"kind":"randers","a":[["1","0"],["0","1"]],"b":["0.3","0"]}"#;
        let spec = load_metric(json).unwrap();
        let l = spec.assemble_l();
        let v = l
            .eval_at(&[c(0.2, 0.0), c(0.0, 0.1)], &[c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!((v - c(1.69, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn kropina_with_zero_b_is_rejected() {
        let json = r#"{"name":"k","dimension":2,"kind":"kropina","a":[["1","0"],["0","1"]],"b":["0","0"]}"#;
        assert!(matches!(load_metric(json), Err(Error::Validation { .. })));
    }

    #[test]
    fn antonelli_shimada_value() {
        let json = r#"{"name":"as","dimension":2,"kind":"antonelli_shimada","sigma":"0"}"#;
        let spec = load_metric(json).unwrap();
        let v = spec
            .assemble_l()
            .eval_at(&[c(0.0, 0.0); 2], &[c(1.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        assert!((v - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn schema_errors() {
        let unknown = r#"{"name":"x","dimension":2,"kind":"hermitian","a":[["1","0"],["0","1"]],"extra":1}"#;
        assert!(matches!(load_metric(unknown), Err(Error::Schema(_))));
        let wrong_payload = r#"{"name":"x","dimension":2,"kind":"hermitian","sigma":"0"}"#;
        assert!(matches!(load_metric(wrong_payload), Err(Error::Schema(_))));
        let bad_kind = r#"{"name":"x","dimension":2,"kind":"riemann","a":[["1"]]}"#;
        assert!(matches!(load_metric(bad_kind), Err(Error::Schema(_))));
        let eta_in_a = r#"{"name":"x","dimension":2,"kind":"hermitian","a":[["1","0"],["0","abs2(eta1)"]]}"#;
        assert!(matches!(load_metric(eta_in_a), Err(Error::Schema(_))));
    }

    #[test]
    fn syntax_error_carries_field_path() {
        let json = r#"{"name":"x","dimension":2,"kind":"hermitian","a":[["1","0"],["0","1+"]]}"#;
        match load_metric(json).unwrap_err() {
            Error::InField { field, source } => {
                assert_eq!(field, "a[1][1]");
                assert!(matches!(*source, Error::Syntax { .. }));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn non_hermitian_and_indefinite_are_rejected() {
        let asym = r#"{"name":"x","dimension":2,"kind":"hermitian","a":[["1","0.5"],["0","1"]]}"#;
        assert!(matches!(load_metric(asym), Err(Error::Validation { .. })));
        let indef = r#"{"name":"x","dimension":2,"kind":"hermitian","a":[["1","0"],["0","-1"]]}"#;
        assert!(matches!(load_metric(indef), Err(Error::Validation { .. })));
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"name":"r","dimension":2,"kind":"randers","a":[["1","0.1*z1"],["0.1*conj(z1)","1"]],"b":["0.3","0.1*z2"]}"#;
        let spec = load_metric(json).unwrap();
        let again = load_metric(&spec.to_json()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn scaling_multiplies_l() {
        let json = r#"{"name":"k","dimension":2,"kind":"kropina","a":[["1","0"],["0","1"]],"b":["1","z1"]}"#;
        let spec = load_metric(json).unwrap();
        let (z, eta) = ([c(0.1, 0.2), c(-0.3, 0.0)], [c(0.5, 0.5), c(-0.4, 0.9)]);
        let l1 = spec.assemble_l().eval_at(&z, &eta).unwrap();
        let l2 = spec.scaled(2.0).assemble_l().eval_at(&z, &eta).unwrap();
        assert!((l2 - 2.0 * l1).norm() < 1e-13);
    }

    #[test]
    fn transformed_metric_agrees_pointwise() {
        let json =
            r#"{"name":"r","dimension":2,"kind":"randers","a":[["exp(abs2(z2))","0"],["0","1"]],"b":["0.3*z1","0.1"]}"#;
        let spec = load_metric(json).unwrap();
        let mut a = Tensor::identity(2);
        a[[0, 1]] = c(0.5, -0.25);
        a[[1, 0]] = c(0.0, 0.3);
        let t = spec.transformed(&a).unwrap();
        let s = TangentSample::new(vec![c(0.1, 0.2), c(-0.3, 0.0)], vec![c(0.5, 0.5), c(-0.4, 0.9)]);
        let s2 = s.transformed(&a);
        let l1 = spec.assemble_l().eval_at(&s.z, &s.eta).unwrap();
        let l2 = t.assemble_l().eval_at(&s2.z, &s2.eta).unwrap();
        assert!((l1 - l2).norm() < 1e-13);
    }
}
