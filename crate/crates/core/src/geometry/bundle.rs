//! Connection data at a single tangent sample.
//!
//! Everything is read off one Taylor expansion of `L` (order 5 in
//! `z, z̄, η, η̄` with at most one position derivative). The nonlinear
//! connection is formed as `N^i_j = g^{m̄ i} ∂_{z^j} ∂_{η̄^m} L`, which by
//! homogeneity equals `g^{m̄ i} (∂_{z^j} g_{l m̄}) η^l` but needs two fewer
//! derivative orders, so the spray and its third η-derivatives stay within
//! the expansion.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::ad::{expand, Group, Jet, Shape};
use crate::dsl::Expr;
use crate::error::Result;
use crate::sample::TangentSample;
use crate::tensor::{HermitianMatrix, MixedCoeffs, Tensor, Tensor3, Tensor3Bar, Tensor4, C, ZERO};

const ORDER: u8 = 5;

/// Derivatives of bundle objects needed by the covariant derivatives and
/// the identity suites. Rank-4 entries append the derivative index last.
#[derive(Clone, Debug)]
pub struct BundleDerivatives {
    /// `∂_{z^k} g_{i j̄}` at `[i, j, k]`.
    pub dz_g: Tensor3,
    pub dzbar_g: Tensor3,
    /// `∂_{z^k} C_{i j̄ h}` at `[i, j, h, k]`.
    pub dz_c: Tensor4,
    pub dzbar_c: Tensor4,
    /// `∂_{z^k} C_{i j̄ h̄}` at `[i, j, h, k]`.
    pub dz_cbar: Tensor4,
    /// `∂̇_m C_{i j̄ h}` at `[i, j, h, m]`.
    pub deta_c: Tensor4,
    pub detabar_c: Tensor4,
    pub deta_cbar: Tensor4,
    /// `∂̇_h L^i_{jk}` at `[i, j, k, h]`.
    pub d_lcf: Tensor4,
    pub d_lcf_bar: Tensor4,
    /// `∂̇_h BL^i_{jk}` at `[i, j, k, h]`.
    pub d_bl: Tensor4,
    pub d_bl_bar: Tensor4,
    /// `∂̇_h BL^i_{j k̄}` at `[i, j, k, h]`.
    pub d_blbar: Tensor4,
    pub d_blbar_bar: Tensor4,
    /// `∂̇_h (g_{i j̄ B|k})` at `[i, j, k, h]`.
    pub d_gb: Tensor4,
    pub d_gb_bar: Tensor4,
    /// `g_{i j̄ B|k}` at `[i, j, k]`.
    pub g_b: Tensor3,
    /// `g^{m̄ i} (∂_{z^j} g_{l m̄}) η^l`, the unreduced form of `N`.
    pub n_displayed: Tensor,
    /// `g^{l̄ i} δ_k g_{j l̄}`, the adapted-frame form of `L^i_{jk}`.
    pub l_cf_frame: MixedCoeffs,
    /// `∂_{η^i} L`.
    pub eta_lower: Vec<C>,
}

#[derive(Clone, Debug)]
pub struct ConnectionBundle {
    pub sample: TangentSample,
    pub l: C,
    pub g: HermitianMatrix,
    /// `g^{j̄ i}` at `[j, i]`.
    pub g_inv: HermitianMatrix,
    pub c: Tensor3,
    pub cbar: Tensor3Bar,
    /// Chern-Finsler nonlinear connection `N^i_j` at `[i, j]`.
    pub n: Tensor,
    /// Canonical nonlinear connection `cN^i_j = ∂̇_j G^i`.
    pub cn: Tensor,
    /// `∂̇_{k̄} N^i_j` at `[i, j, k]`.
    pub dnbar: Tensor3,
    pub spray: Vec<C>,
    /// `∂̇_{k̄} G^i` at `[i, k]`.
    pub dgbar: Tensor,
    pub l_cf: MixedCoeffs,
    pub c_cf: MixedCoeffs,
    pub bl: MixedCoeffs,
    /// `BL^i_{j k̄}` at `[i, j, k]`.
    pub blbar: MixedCoeffs,
    pub cl: MixedCoeffs,
    /// `cL^i_{j k̄}` at `[i, j, k]`.
    pub clbar: MixedCoeffs,
    pub torsion: MixedCoeffs,
    pub d: BundleDerivatives,
}

type JetMat = Vec<Vec<Jet>>;

fn values2(m: &JetMat) -> Tensor {
    let n = m.len();
    Tensor::from_fn(n, 2, |ix| m[ix[0]][ix[1]].value())
}

fn mat_mul(a: &JetMat, b: &JetMat) -> JetMat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (1..n).fold(&a[i][0] * &b[0][j], |acc, k| &acc + &(&a[i][k] * &b[k][j])))
                .collect()
        })
        .collect()
}

/// Inverse of a matrix of jets by a Neumann series around its value.
fn jet_inverse(g: &JetMat, g0_inv: &Tensor) -> JetMat {
    let n = g.len();
    let space = g[0][0].space().clone();
    let order = g[0][0].valid().order;
    let konst = |t: &Tensor| -> JetMat {
        (0..n)
            .map(|i| (0..n).map(|j| Jet::constant(&space, t[[i, j]])).collect())
            .collect()
    };
    let inv0 = konst(g0_inv);
    let nil: JetMat = (0..n)
        .map(|i| (0..n).map(|j| g[i][j].add_constant(-g[i][j].value())).collect())
        .collect();
    let p: JetMat = mat_mul(&inv0, &nil)
        .into_iter()
        .map(|row| row.into_iter().map(|x| -&x).collect())
        .collect();
    let mut term = inv0.clone();
    let mut sum = inv0;
    for _ in 0..order {
        term = mat_mul(&p, &term);
        sum = (0..n)
            .map(|i| (0..n).map(|j| &sum[i][j] + &term[i][j]).collect())
            .collect();
    }
    sum
}

/// Fundamental tensor `g_{i j̄} = ∂²L/∂η^i∂η̄^j` at a sample.
pub fn fundamental_tensor(l: &Expr, s: &TangentSample) -> Result<HermitianMatrix> {
    let jet = expand(l, s, Shape::new(2, 0))?;
    let n = s.dim();
    Ok(HermitianMatrix::from_tensor(Tensor::from_fn(n, 2, |ix| {
        jet.derivative(Group::Eta, ix[0])
            .derivative(Group::EtaBar, ix[1])
            .value()
    })))
}

/// Chern-Finsler `N^i_j` and spray `G^i` only, from a second-order expansion.
pub fn nonlinear_connection(l: &Expr, s: &TangentSample) -> Result<(Tensor, Vec<C>)> {
    let n = s.dim();
    let jet = expand(l, s, Shape::new(2, 1))?;
    let g = HermitianMatrix::from_tensor(Tensor::from_fn(n, 2, |ix| {
        jet.derivative(Group::Eta, ix[0])
            .derivative(Group::EtaBar, ix[1])
            .value()
    }));
    let ginv = g.invert()?;
    let d = Tensor::from_fn(n, 2, |ix| {
        jet.derivative(Group::Z, ix[0]).derivative(Group::EtaBar, ix[1]).value()
    });
    let nn = Tensor::from_fn(n, 2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        (0..n).map(|m| ginv.0[[m, i]] * d[[j, m]]).sum()
    });
    let spray = (0..n)
        .map(|i| (0..n).map(|j| nn[[i, j]] * s.eta[j]).sum::<C>() * 0.5)
        .collect();
    Ok((nn, spray))
}

impl ConnectionBundle {
    pub fn compute(l: &Expr, s: &TangentSample) -> Result<ConnectionBundle> {
        let n = s.dim();
        let lj = expand(l, s, Shape::new(ORDER, 1))?;
        let space = lj.space().clone();
        let eta_j: Vec<Jet> = (0..n).map(|k| Jet::variable(&space, Group::Eta, k, s.eta[k])).collect();

        let dl_eta: Vec<Jet> = (0..n).map(|i| lj.derivative(Group::Eta, i)).collect();
        let gj: JetMat = (0..n)
            .map(|i| (0..n).map(|j| dl_eta[i].derivative(Group::EtaBar, j)).collect())
            .collect();
        let g = HermitianMatrix::from_tensor(values2(&gj));
        let g_inv = g.invert()?;
        let ginv_j = jet_inverse(&gj, &g_inv.0);
        let gi = &g_inv.0;

        // ∂_{z^j} ∂_{η̄^m} L at [j][m].
        let dzl: JetMat = (0..n)
            .map(|j| {
                let dz = lj.derivative(Group::Z, j);
                (0..n).map(|m| dz.derivative(Group::EtaBar, m)).collect()
            })
            .collect();
        let nj: JetMat = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (1..n).fold(&ginv_j[0][i] * &dzl[j][0], |acc, m| {
                            &acc + &(&ginv_j[m][i] * &dzl[j][m])
                        })
                    })
                    .collect()
            })
            .collect();
        let gsp: Vec<Jet> = (0..n)
            .map(|i| {
                (0..n)
                    .fold(Jet::constant(&space, ZERO), |acc, j| &acc + &(&nj[i][j] * &eta_j[j]))
                    .scale(C::new(0.5, 0.0))
            })
            .collect();
        let cnj: JetMat = (0..n)
            .map(|i| (0..n).map(|j| gsp[i].derivative(Group::Eta, j)).collect())
            .collect();
        let cube = |f: &dyn Fn(usize, usize, usize) -> Jet| -> Vec<Vec<Vec<Jet>>> {
            (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| f(i, j, k)).collect()).collect())
                .collect()
        };
        let blj = cube(&|i, j, k| cnj[i][j].derivative(Group::Eta, k));
        let blbarj = cube(&|i, j, k| cnj[i][j].derivative(Group::EtaBar, k));
        let lcfj = cube(&|i, j, k| nj[i][k].derivative(Group::Eta, j));

        let t3 = |f: &dyn Fn(usize, usize, usize) -> C| Tensor::from_fn(n, 3, |ix| f(ix[0], ix[1], ix[2]));
        let t4 =
            |f: &dyn Fn(usize, usize, usize, usize) -> C| Tensor::from_fn(n, 4, |ix| f(ix[0], ix[1], ix[2], ix[3]));

        let c = t3(&|i, j, k| gj[i][j].derivative(Group::Eta, k).value());
        let cbar = t3(&|i, j, k| gj[i][j].derivative(Group::EtaBar, k).value());
        let nn = values2(&nj);
        let cn = values2(&cnj);
        let spray: Vec<C> = gsp.iter().map(Jet::value).collect();
        let dgbar = Tensor::from_fn(n, 2, |ix| gsp[ix[0]].derivative(Group::EtaBar, ix[1]).value());
        let dnbar = t3(&|i, j, k| nj[i][j].derivative(Group::EtaBar, k).value());
        let l_cf = t3(&|i, j, k| lcfj[i][j][k].value());
        let c_cf = t3(&|i, j, k| (0..n).map(|l| gi[[l, i]] * c[[j, l, k]]).sum());
        let bl = t3(&|i, j, k| blj[i][j][k].value());
        let blbar = t3(&|i, j, k| blbarj[i][j][k].value());

        let dz_g = t3(&|i, j, k| gj[i][j].derivative(Group::Z, k).value());
        let dzbar_g = t3(&|i, j, k| gj[i][j].derivative(Group::ZBar, k).value());

        // Adapted-frame derivatives of g for the canonical connection.
        let cdelta_g = t3(&|j, l, k| dz_g[[j, l, k]] - (0..n).map(|m| cn[[m, k]] * c[[j, l, m]]).sum::<C>());
        let cdeltabar_g =
            t3(&|j, l, k| dzbar_g[[j, l, k]] - (0..n).map(|m| cn[[m, k]].conj() * cbar[[j, l, m]]).sum::<C>());
        let cl = t3(&|i, j, k| {
            (0..n)
                .map(|l| gi[[l, i]] * (cdelta_g[[j, l, k]] + cdelta_g[[k, l, j]]))
                .sum::<C>()
                * 0.5
        });
        let clbar = t3(&|i, j, k| {
            (0..n)
                .map(|l| gi[[l, i]] * (cdeltabar_g[[j, l, k]] - cdeltabar_g[[j, k, l]]))
                .sum::<C>()
                * 0.5
        });
        let torsion = l_cf.sub(&l_cf.permuted(&[0, 2, 1]));

        let n_displayed = Tensor::from_fn(n, 2, |ix| {
            let (i, j) = (ix[0], ix[1]);
            (0..n)
                .map(|m| gi[[m, i]] * (0..n).map(|l| dz_g[[l, m, j]] * s.eta[l]).sum::<C>())
                .sum()
        });
        let l_cf_frame = t3(&|i, j, k| {
            (0..n)
                .map(|l| {
                    let delta = dz_g[[j, l, k]] - (0..n).map(|m| nn[[m, k]] * c[[j, l, m]]).sum::<C>();
                    gi[[l, i]] * delta
                })
                .sum()
        });

        let dc = |grp: Group| t4(&|i, j, h, k| gj[i][j].derivative(Group::Eta, h).derivative(grp, k).value());
        let dcbar = |grp: Group| t4(&|i, j, h, k| gj[i][j].derivative(Group::EtaBar, h).derivative(grp, k).value());
        let d_of = |cube: &Vec<Vec<Vec<Jet>>>, grp: Group| t4(&|i, j, k, h| cube[i][j][k].derivative(grp, h).value());

        // g_{i j̄ B|k} as jets, so its η-derivatives are exact.
        let gbj = cube(&|i, j, k| {
            let mut acc = gj[i][j].derivative(Group::Z, k);
            for m in 0..n {
                acc = &acc - &(&cnj[m][k] * &gj[i][j].derivative(Group::Eta, m));
                acc = &acc - &(&blj[m][i][k] * &gj[m][j]);
                acc = &acc - &(&blbarj[m][j][k].conj() * &gj[i][m]);
            }
            acc
        });

        let d = BundleDerivatives {
            dz_c: dc(Group::Z),
            dzbar_c: dc(Group::ZBar),
            dz_cbar: dcbar(Group::Z),
            deta_c: dc(Group::Eta),
            detabar_c: dc(Group::EtaBar),
            deta_cbar: dcbar(Group::Eta),
            d_lcf: d_of(&lcfj, Group::Eta),
            d_lcf_bar: d_of(&lcfj, Group::EtaBar),
            d_bl: d_of(&blj, Group::Eta),
            d_bl_bar: d_of(&blj, Group::EtaBar),
            d_blbar: d_of(&blbarj, Group::Eta),
            d_blbar_bar: d_of(&blbarj, Group::EtaBar),
            d_gb: d_of(&gbj, Group::Eta),
            d_gb_bar: d_of(&gbj, Group::EtaBar),
            g_b: t3(&|i, j, k| gbj[i][j][k].value()),
            n_displayed,
            l_cf_frame,
            eta_lower: dl_eta.iter().map(Jet::value).collect(),
            dz_g,
            dzbar_g,
        };
        Ok(ConnectionBundle {
            sample: s.clone(),
            l: lj.value(),
            g,
            g_inv,
            c,
            cbar,
            n: nn,
            cn,
            dnbar,
            spray,
            dgbar,
            l_cf,
            c_cf,
            bl,
            blbar,
            cl,
            clbar,
            torsion,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.sample.dim()
    }

    pub fn eta(&self) -> &[C] {
        &self.sample.eta
    }

    pub fn eta_bar(&self) -> Vec<C> {
        self.sample.eta.iter().map(|e| e.conj()).collect()
    }

    /// Bundle tensors as JSON, with the storage conventions in `conventions`.
    pub fn to_json(&self) -> Value {
        let cv = |v: &[Complex64]| Value::from(v.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>());
        json!({
            "conventions": {
                "complex": "[re, im]",
                "indices": "0-based",
                "g": "g[i][j] = g_{i jbar}",
                "g_inv": "g_inv[j][i] = g^{jbar i}",
                "C": "C[i][j][k] = C_{i jbar k} = d g_{i jbar} / d eta^k",
                "Cbar": "Cbar[i][j][k] = C_{i jbar kbar} = d g_{i jbar} / d etabar^k",
                "N": "N[i][j] = N^i_j (Chern-Finsler)",
                "cN": "cN[i][j] = cN^i_j = d G^i / d eta^j",
                "dNbar": "dNbar[i][j][k] = d N^i_j / d etabar^k",
                "G": "G[i] = G^i",
                "dGbar": "dGbar[i][k] = d G^i / d etabar^k",
                "mixed": "X[i][j][k] = X^i_{jk}; barred variants X^i_{j kbar}",
                "T": "T[i][j][k] = L^i_{jk} - L^i_{kj}"
            },
            "sample": {"z": cv(&self.sample.z), "eta": cv(&self.sample.eta)},
            "L": [self.l.re, self.l.im],
            "g": self.g.0.to_json(),
            "g_inv": self.g_inv.0.to_json(),
            "C": self.c.to_json(),
            "Cbar": self.cbar.to_json(),
            "N": self.n.to_json(),
            "cN": self.cn.to_json(),
            "dNbar": self.dnbar.to_json(),
            "G": cv(&self.spray),
            "dGbar": self.dgbar.to_json(),
            "L_cf": self.l_cf.to_json(),
            "C_cf": self.c_cf.to_json(),
            "BL": self.bl.to_json(),
            "BLbar": self.blbar.to_json(),
            "cL": self.cl.to_json(),
            "cLbar": self.clbar.to_json(),
            "T": self.torsion.to_json(),
        })
    }
}
