//! Sample-based classification: residual predicates, verdicts, the
//! inclusion lattice and equivalence cross-checks.

pub mod alpha_beta;
pub mod residuals;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dsl::{MetricKind, MetricSpec};
use crate::error::Result;
use crate::geometry::{ConnectionBundle, CovDerivs};
use crate::sample::{SamplePlan, TangentSample};
use crate::tensor::{scaled_residual, Tensor};

pub use alpha_beta::{AlphaBetaAux, KropinaAux, RandersAux};

pub const DEFAULT_TOL: f64 = 1e-7;
/// Width of the borderline band as a multiple of the tolerance.
pub const BAND: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Borderline,
}

impl Verdict {
    pub fn of(residual: f64, tol: f64) -> Verdict {
        if residual < tol {
            Verdict::Holds
        } else if residual > BAND * tol || residual.is_nan() {
            Verdict::Fails
        } else {
            Verdict::Borderline
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Borderline => "borderline",
        }
    }
}

/// Predicate id and the atoms whose maximum it is. `disp:` atoms are
/// dispersions over samples sharing a base point.
const COMMON: &[(&str, &[&str])] = &[
    ("kahler.strong", &["torsion"]),
    ("kahler", &["torsion_eta"]),
    ("kahler.weak", &["torsion_weak"]),
    ("landsberg", &["bl_minus_cl"]),
    ("thm3.1.ii", &["c_b_0"]),
    ("thm3.1.iii", &["thm3.1.iii"]),
    ("thm3.1.iv", &["thm3.1.iv"]),
    ("g_landsberg", &["bl_minus_cl", "dgbar"]),
    ("thm3.2.ii", &["bl_minus_cl", "disp:cl"]),
    ("thm3.2.iii", &["c_b_0", "c_b_bar_00"]),
    ("thm3.2.iv", &["thm3.2.iv", "dgbar"]),
    ("thm3.2.v", &["thm3.2.v.h", "thm3.2.v.hbar"]),
    ("strong_landsberg", &["c_b_0", "c_b_bar_0"]),
    ("thm3.3.ii", &["d_gb", "disp:g_b", "dgbar"]),
    ("thm3.3.iii", &["c_b_h", "dgbar"]),
    ("thm3.3.iv", &["c_b_bar"]),
    ("remark3.1", &["disp:clbar_g", "dgbar"]),
    ("complex_berwald", &["torsion_eta", "dgbar"]),
    ("thm3.4.ii", &["blbar_minus_clbar"]),
    ("thm3.4.iii", &["bl_minus_lcf", "d_lcf", "disp:l_cf"]),
    ("thm3.4.iv", &["torsion_eta", "d_lcf", "disp:l_cf"]),
    ("thm3.4.v", &["g_b", "dgbar"]),
    ("thm3.5", &["torsion_eta", "c_cf_either"]),
    ("lemma3.1.h", &["c_cf_h"]),
    ("lemma3.1.hbar", &["c_cf_hbar"]),
    ("generalized_berwald", &["d_bl", "disp:bl"]),
    ("thm3.6.ii", &["dgbar"]),
    ("thm3.6.iii", &["blbar"]),
    ("l_cf.z_only", &["d_lcf", "disp:l_cf"]),
];

const RANDERS: &[(&str, &[&str])] = &[
    ("thm4.2.scalar", &["randers.gb_scalar"]),
    ("prop4.2.criterion", &["randers.weakly_kahler"]),
    ("thm4.3.gb_and_weak", &["d_bl", "disp:bl", "torsion_weak"]),
    ("randers.eta_lower", &["randers.eta_lower"]),
    ("randers.nonlinear_connection", &["randers.nonlinear_connection"]),
    ("randers.spray", &["randers.spray"]),
];

const KROPINA: &[(&str, &[&str])] = &[
    ("prop4.3.scalar", &["kropina.gb_scalar"]),
    ("prop4.3.spray", &["kropina.spray_minus_alpha"]),
    ("prop4.4.vector", &["kropina.gb_vector"]),
    ("prop4.4.connection", &["kropina.n_minus_alpha"]),
    ("alpha.kahler", &["alpha.torsion"]),
    ("thm4.5.hypothesis", &["alpha.torsion", "kropina.gb_vector"]),
    ("kropina.eta_lower", &["kropina.eta_lower"]),
    ("kropina.nonlinear_connection", &["kropina.nonlinear_connection"]),
    ("kropina.spray", &["kropina.spray"]),
];

/// Predicates checking closed-form displays against the generic engine.
pub const FORMULA_CHECKS: [&str; 6] = [
    "randers.eta_lower",
    "randers.nonlinear_connection",
    "randers.spray",
    "kropina.eta_lower",
    "kropina.nonlinear_connection",
    "kropina.spray",
];

/// Lattice class and the predicate that decides it.
pub const LATTICE: [(&str, &str); 7] = [
    ("kahler", "kahler"),
    ("weakly_kahler", "kahler.weak"),
    ("landsberg", "landsberg"),
    ("g_landsberg", "g_landsberg"),
    ("strong_landsberg", "strong_landsberg"),
    ("generalized_berwald", "generalized_berwald"),
    ("complex_berwald", "complex_berwald"),
];

const INCLUSIONS: [(&str, &str); 7] = [
    ("complex_berwald", "strong_landsberg"),
    ("strong_landsberg", "g_landsberg"),
    ("g_landsberg", "landsberg"),
    ("g_landsberg", "generalized_berwald"),
    ("kahler", "landsberg"),
    ("kahler", "weakly_kahler"),
    ("complex_berwald", "kahler"),
];

const EQUIVALENCES: &[(&str, &[&str])] = &[
    ("thm3.1", &["landsberg", "thm3.1.ii", "thm3.1.iii", "thm3.1.iv"]),
    (
        "thm3.2",
        &["g_landsberg", "thm3.2.ii", "thm3.2.iii", "thm3.2.iv", "thm3.2.v"],
    ),
    (
        "thm3.3",
        &["strong_landsberg", "thm3.3.ii", "thm3.3.iii", "thm3.3.iv", "remark3.1"],
    ),
    (
        "thm3.4",
        &[
            "complex_berwald",
            "thm3.4.ii",
            "thm3.4.iii",
            "thm3.4.iv",
            "thm3.4.v",
            "thm3.5",
        ],
    ),
    ("thm3.6", &["generalized_berwald", "thm3.6.ii", "thm3.6.iii"]),
    ("lemma3.1", &["lemma3.1.h", "lemma3.1.hbar"]),
    ("thm4.2", &["generalized_berwald", "thm4.2.scalar"]),
    ("prop4.2", &["kahler.weak", "prop4.2.criterion"]),
    ("thm4.3", &["thm4.3.gb_and_weak", "complex_berwald"]),
    ("prop4.3", &["prop4.3.scalar", "prop4.3.spray"]),
    ("prop4.4", &["prop4.4.vector", "prop4.4.connection"]),
];

const IMPLICATIONS: &[(&str, &str, &str)] = &[
    ("cor3.2", "l_cf.z_only", "generalized_berwald"),
    ("thm4.4", "prop4.3.scalar", "generalized_berwald"),
    ("thm4.5", "thm4.5.hypothesis", "complex_berwald"),
];

const CONVENTION_NOTES: [&str; 2] = [
    "convention: C_{j r̄ h B|k̄} is the conjugate-dual horizontal derivative, conj(C_{r j̄ h̄ B|k})",
    "convention: z-only dependence is tested by dispersion over eta samples sharing a base point \
     (plus pointwise eta-derivatives where available); remark3.1 uses dispersion alone",
];

pub const EVIDENCE_NOTE: &str =
    "verdicts are sample-based evidence over the recorded sample plan, not a certificate on all of M";

#[derive(Clone, Debug, Serialize)]
pub struct PredicateResidual {
    pub id: String,
    /// `null` where the sample failed to evaluate.
    pub per_sample: Vec<Option<f64>>,
    pub aggregate: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub theorem: String,
    pub kind: &'static str,
    pub members: Vec<String>,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub metric: String,
    pub kind: String,
    pub plan: SamplePlan,
    pub sample_count: usize,
    pub tolerance: f64,
    pub predicates: Vec<PredicateResidual>,
    pub lattice: BTreeMap<String, Verdict>,
    pub crosschecks: Vec<CrossCheck>,
    pub warnings: Vec<String>,
    pub evidence: &'static str,
}

impl ClassificationReport {
    pub fn predicate(&self, id: &str) -> Option<&PredicateResidual> {
        self.predicates.iter().find(|p| p.id == id)
    }

    pub fn verdict(&self, id: &str) -> Option<Verdict> {
        self.predicate(id).map(|p| p.verdict)
    }

    pub fn class(&self, class: &str) -> Option<Verdict> {
        self.lattice.get(class).copied()
    }

    /// Whether any equivalence split or inclusion violation was found.
    pub fn inconsistent(&self) -> bool {
        self.crosschecks.iter().any(|c| !c.consistent)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per (predicate, sample).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("predicate_id,sample_index,residual\n");
        for p in &self.predicates {
            for (i, r) in p.per_sample.iter().enumerate() {
                match r {
                    Some(v) => out.push_str(&format!("{},{},{:e}\n", p.id, i, v)),
                    None => out.push_str(&format!("{},{},\n", p.id, i)),
                }
            }
        }
        out
    }
}

struct SampleOutcome {
    atoms: BTreeMap<&'static str, f64>,
    dispersed: Vec<(&'static str, Tensor)>,
    notes: Vec<String>,
}

fn diff(a: &Tensor, b: &Tensor) -> f64 {
    scaled_residual(&a.sub(b), &[a, b])
}

fn max_norm(v: &[crate::tensor::C]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn evaluate(spec: &MetricSpec, l: &crate::dsl::Expr, s: &TangentSample) -> Result<SampleOutcome> {
    let b = ConnectionBundle::compute(l, s)?;
    let cd = CovDerivs::compute(&b);
    let at = residuals::compute(&b, &cd);
    let mut atoms: BTreeMap<&'static str, f64> = at.values.into_iter().collect();
    let mut notes = Vec::new();
    let spray = Tensor::vector(&b.spray);
    let eta_lower = Tensor::vector(&b.d.eta_lower);
    match &spec.kind {
        MetricKind::Randers { .. } => {
            let r = RandersAux::compute(spec, s)?;
            atoms.insert("randers.gb_scalar", r.base.gb_scalar().norm());
            match r.weakly_kahler_vector() {
                Ok(w) => {
                    atoms.insert("randers.weakly_kahler", max_norm(&w));
                }
                Err(e) => notes.push(format!("prop4.2.criterion skipped: {}", e)),
            }
            atoms.insert("randers.eta_lower", diff(&Tensor::vector(&r.eta_lower()), &eta_lower));
            atoms.insert("randers.nonlinear_connection", diff(&r.nonlinear_connection(), &b.n));
            atoms.insert("randers.spray", diff(&Tensor::vector(&r.spray()), &spray));
        }
        MetricKind::Kropina { .. } => {
            let k = KropinaAux::compute(spec, s)?;
            atoms.insert("kropina.gb_scalar", k.base.gb_scalar().norm());
            atoms.insert("kropina.gb_vector", max_norm(&k.base.gb_vector()));
            let a_spray = Tensor::vector(&k.base.a_spray);
            atoms.insert("kropina.spray_minus_alpha", diff(&spray, &a_spray));
            atoms.insert("kropina.n_minus_alpha", diff(&b.n, &k.base.a_n));
            atoms.insert("alpha.torsion", k.base.alpha_torsion().max_abs());
            atoms.insert("kropina.eta_lower", diff(&Tensor::vector(&k.eta_lower()), &eta_lower));
            atoms.insert("kropina.nonlinear_connection", diff(&k.nonlinear_connection(), &b.n));
            atoms.insert("kropina.spray", diff(&Tensor::vector(&k.spray()), &spray));
        }
        _ => {}
    }
    Ok(SampleOutcome {
        atoms,
        dispersed: at.dispersed,
        notes,
    })
}

/// Caps the worker count of the global pool. Only the first call takes
/// effect.
pub fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads.filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn predicate_table(kind: &MetricKind) -> Vec<(&'static str, &'static [&'static str])> {
    let mut table: Vec<_> = COMMON.to_vec();
    match kind {
        MetricKind::Randers { .. } => table.extend_from_slice(RANDERS),
        MetricKind::Kropina { .. } => table.extend_from_slice(KROPINA),
        _ => {}
    }
    table
}

pub fn classify(spec: &MetricSpec, plan: &SamplePlan, tol: f64) -> Result<ClassificationReport> {
    let set = spec.samples(plan)?;
    let flat = set.flat();
    let l = spec.assemble_l();
    let outcomes: Vec<Result<SampleOutcome>> = flat.par_iter().map(|s| evaluate(spec, &l, s)).collect();

    let mut warnings: Vec<String> = CONVENTION_NOTES.iter().map(|s| s.to_string()).collect();
    let mut group_of = Vec::with_capacity(flat.len());
    for (g, members) in set.groups.iter().enumerate() {
        group_of.extend(std::iter::repeat_n(g, members.len()));
    }
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            Ok(o) => warnings.extend(o.notes.iter().map(|n| format!("sample {}: {}", i, n))),
            Err(e) => warnings.push(format!("sample {}: {}", i, e)),
        }
    }

    // Dispersion per group, broadcast back to member samples.
    let mut disp: BTreeMap<&'static str, Vec<Option<f64>>> = BTreeMap::new();
    for name in residuals::DISPERSED {
        let mut per_sample = vec![None; flat.len()];
        for g in 0..set.groups.len() {
            let members: Vec<usize> = (0..flat.len()).filter(|&i| group_of[i] == g).collect();
            let tensors: Vec<&Tensor> = members
                .iter()
                .filter_map(|&i| outcomes[i].as_ref().ok())
                .filter_map(|o| o.dispersed.iter().find(|(k, _)| *k == name).map(|(_, t)| t))
                .collect();
            if tensors.is_empty() {
                continue;
            }
            let value = residuals::dispersion(&tensors);
            for &i in &members {
                if outcomes[i].is_ok() {
                    per_sample[i] = Some(value);
                }
            }
        }
        disp.insert(name, per_sample);
    }

    let atom = |i: usize, name: &str| -> Option<f64> {
        match name.strip_prefix("disp:") {
            Some(d) => disp.get(d).and_then(|v| v[i]),
            None => outcomes[i].as_ref().ok().and_then(|o| o.atoms.get(name).copied()),
        }
    };

    let predicates: Vec<PredicateResidual> = predicate_table(&spec.kind)
        .into_iter()
        .map(|(id, atoms)| {
            let per_sample: Vec<Option<f64>> = (0..flat.len())
                .map(|i| {
                    atoms
                        .iter()
                        .map(|a| atom(i, a))
                        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
                })
                .collect();
            let evaluated: Vec<f64> = per_sample.iter().flatten().copied().collect();
            let aggregate = if evaluated.is_empty() {
                f64::NAN
            } else {
                evaluated.iter().copied().fold(0.0, f64::max)
            };
            PredicateResidual {
                id: id.to_string(),
                per_sample,
                aggregate,
                tolerance: tol,
                verdict: Verdict::of(aggregate, tol),
            }
        })
        .collect();

    let verdict = |id: &str| predicates.iter().find(|p| p.id == id).map(|p| p.verdict);
    let lattice: BTreeMap<String, Verdict> = LATTICE
        .iter()
        .filter_map(|(class, pred)| verdict(pred).map(|v| (class.to_string(), v)))
        .collect();

    let mut crosschecks = Vec::new();
    let any_borderline = predicates.iter().any(|p| p.verdict == Verdict::Borderline);
    for (theorem, members) in EQUIVALENCES {
        let vs: Vec<Verdict> = match members.iter().map(|m| verdict(m)).collect::<Option<Vec<_>>>() {
            Some(vs) => vs,
            None => continue,
        };
        let split = vs.contains(&Verdict::Holds) && vs.contains(&Verdict::Fails);
        if vs.contains(&Verdict::Borderline) {
            warnings.push(format!("{}: borderline member, equivalence not asserted", theorem));
        }
        crosschecks.push(CrossCheck {
            theorem: theorem.to_string(),
            kind: "equivalence",
            members: members.iter().map(|m| m.to_string()).collect(),
            consistent: !split,
        });
    }
    let mut implication = |name: String, lhs: Option<Verdict>, rhs: Option<Verdict>, members: Vec<String>| {
        if let (Some(a), Some(b)) = (lhs, rhs) {
            let violated = a == Verdict::Holds && b == Verdict::Fails;
            if violated && any_borderline {
                warnings.push(format!("{}: violated while some predicate is borderline", name));
            }
            crosschecks.push(CrossCheck {
                theorem: name,
                kind: "implication",
                members,
                consistent: !violated || any_borderline,
            });
        }
    };
    for (a, b) in INCLUSIONS {
        implication(
            format!("lattice:{}=>{}", a, b),
            lattice.get(a).copied(),
            lattice.get(b).copied(),
            vec![a.to_string(), b.to_string()],
        );
    }
    for (name, a, b) in IMPLICATIONS {
        implication(
            name.to_string(),
            verdict(a),
            verdict(b),
            vec![a.to_string(), b.to_string()],
        );
    }

    for id in FORMULA_CHECKS {
        if let Some(v) = verdict(id) {
            if v != Verdict::Holds {
                warnings.push(format!("{}: closed-form display disagrees with the generic engine", id));
            }
        }
    }

    Ok(ClassificationReport {
        metric: spec.name.clone(),
        kind: spec.kind.tag().to_string(),
        plan: plan.clone(),
        sample_count: flat.len(),
        tolerance: tol,
        predicates,
        lattice,
        crosschecks,
        warnings,
        evidence: EVIDENCE_NOTE,
    })
}
