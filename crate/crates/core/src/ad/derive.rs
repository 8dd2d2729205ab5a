use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::jet::{Group, Jet, JetSpace, Shape, MAX_ORDER};
use super::multi_index::MultiIndex;
use crate::dsl::expr::{Expr, Var};
use crate::error::{Error, Result};
use crate::sample::TangentSample;

/// Derivatives of a scalar at a point, keyed by multi-index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JetValue {
    pub point: TangentSample,
    pub values: BTreeMap<MultiIndex, Complex64>,
}

impl JetValue {
    pub fn get(&self, m: &MultiIndex) -> Option<Complex64> {
        self.values.get(m).copied()
    }
}

/// Taylor expansion of `expr` at `point` with the given truncation shape.
pub fn expand(expr: &Expr, point: &TangentSample, shape: Shape) -> Result<Jet> {
    let n = point.dim();
    expr.check_bound(n, n)?;
    let space = JetSpace::get(n, shape);
    let z: Vec<Jet> = (0..n).map(|k| Jet::variable(&space, Group::Z, k, point.z[k])).collect();
    let eta: Vec<Jet> = (0..n)
        .map(|k| Jet::variable(&space, Group::Eta, k, point.eta[k]))
        .collect();
    expr.eval(
        &|v| match v {
            Var::Z(k) => z[k].clone(),
            Var::Eta(k) => eta[k].clone(),
        },
        &|c| Jet::constant(&space, c),
    )
}

pub fn derive(expr: &Expr, point: &TangentSample, requests: &[MultiIndex]) -> Result<JetValue> {
    let n = point.dim();
    let mut order = 0u32;
    let mut z_order = 0u32;
    for m in requests {
        if m.dim() != n {
            return Err(Error::Shape(format!(
                "multi-index of dimension {} at a point of dimension {}",
                m.dim(),
                n
            )));
        }
        if m.order() > MAX_ORDER as u32 {
            return Err(Error::Order {
                order: m.order(),
                cap: MAX_ORDER as u32,
            });
        }
        order = order.max(m.order());
        z_order = z_order.max(m.position_order());
    }
    let jet = expand(expr, point, Shape::new(order as u8, z_order as u8))?;
    let mut values = BTreeMap::new();
    values.insert(MultiIndex::zero(n), jet.value());
    for m in requests {
        let v = jet
            .derivative_at(&m.flat())
            .expect("requested index lies inside the expansion shape");
        values.insert(m.clone(), v);
    }
    Ok(JetValue {
        point: point.clone(),
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdCheck {
    /// `|AD - FD| / max(1, |AD|)` with the refined FD estimate.
    pub residual: f64,
    pub ad: Complex64,
    pub fd: Complex64,
    /// `|FD(h) - FD(h/2)|`, a proxy for the FD truncation error.
    pub discrepancy: f64,
}

/// Real coordinate direction: variable slot and real (false) or imaginary (true) part.
type Dir = (usize, bool);

fn shifted(point: &TangentSample, moves: &[(Dir, f64)]) -> TangentSample {
    let n = point.dim();
    let mut p = point.clone();
    for &((slot, imag), h) in moves {
        let delta = if imag {
            Complex64::new(0.0, h)
        } else {
            Complex64::new(h, 0.0)
        };
        if slot < n {
            p.z[slot] += delta;
        } else {
            p.eta[slot - n] += delta;
        }
    }
    p
}

/// Central-difference estimate of the Wirtinger derivative `index`.
fn fd_estimate(expr: &Expr, point: &TangentSample, ops: &[(usize, bool)], h: f64) -> Result<Complex64> {
    let f = |p: &TangentSample| expr.eval_at(&p.z, &p.eta);
    let half = Complex64::new(0.5, 0.0);
    let i = Complex64::new(0.0, 1.0);
    // Each Wirtinger operator is ½(∂x ∓ i ∂y); `bar` selects the plus sign.
    let weight = |bar: bool, imag: bool| -> Complex64 {
        match (imag, bar) {
            (false, _) => half,
            (true, false) => -i * half,
            (true, true) => i * half,
        }
    };
    match ops {
        [(slot, bar)] => {
            let mut acc = Complex64::new(0.0, 0.0);
            for imag in [false, true] {
                let d = (*slot, imag);
                let plus = f(&shifted(point, &[(d, h)]))?;
                let minus = f(&shifted(point, &[(d, -h)]))?;
                acc += weight(*bar, imag) * (plus - minus) / (2.0 * h);
            }
            Ok(acc)
        }
        [(s1, b1), (s2, b2)] => {
            let mut acc = Complex64::new(0.0, 0.0);
            let centre = f(point)?;
            for im1 in [false, true] {
                for im2 in [false, true] {
                    let d1 = (*s1, im1);
                    let d2 = (*s2, im2);
                    let second = if d1 == d2 {
                        let plus = f(&shifted(point, &[(d1, h)]))?;
                        let minus = f(&shifted(point, &[(d1, -h)]))?;
                        (plus - 2.0 * centre + minus) / (h * h)
                    } else {
                        let pp = f(&shifted(point, &[(d1, h), (d2, h)]))?;
                        let pm = f(&shifted(point, &[(d1, h), (d2, -h)]))?;
                        let mp = f(&shifted(point, &[(d1, -h), (d2, h)]))?;
                        let mm = f(&shifted(point, &[(d1, -h), (d2, -h)]))?;
                        (pp - pm - mp + mm) / (4.0 * h * h)
                    };
                    acc += weight(*b1, im1) * weight(*b2, im2) * second;
                }
            }
            Ok(acc)
        }
        _ => unreachable!("fd orders are 1 or 2"),
    }
}

/// Compares the AD value of `index` against Richardson-refined central
/// differences at steps `step` and `step / 2`.
pub fn fd_check(expr: &Expr, point: &TangentSample, index: &MultiIndex, step: f64) -> Result<FdCheck> {
    let order = index.order();
    if order == 0 || order > 2 {
        return Err(Error::Order { order, cap: 2 });
    }
    if !(step > 0.0) {
        return Err(Error::Schema("finite-difference step must be positive".into()));
    }
    let n = point.dim();
    let mut ops = Vec::new();
    for (g, base, bar) in [
        (Group::Z, 0, false),
        (Group::ZBar, 0, true),
        (Group::Eta, n, false),
        (Group::EtaBar, n, true),
    ] {
        for (k, &e) in index.group(g).iter().enumerate() {
            for _ in 0..e {
                ops.push((base + k, bar));
            }
        }
    }
    let ad = derive(expr, point, std::slice::from_ref(index))?
        .get(index)
        .expect("requested derivative present");
    let coarse = fd_estimate(expr, point, &ops, step)?;
    let fine = fd_estimate(expr, point, &ops, step / 2.0)?;
    let fd = (4.0 * fine - coarse) / 3.0;
    Ok(FdCheck {
        residual: (ad - fd).norm() / ad.norm().max(1.0),
        ad,
        fd,
        discrepancy: (fine - coarse).norm(),
    })
}
