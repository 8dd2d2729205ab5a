//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! reach the test log.

use std::collections::BTreeMap;
use std::time::Instant;

use finsler_core::ad::{derive, fd_check, MultiIndex};
use finsler_core::classify::{classify, ClassificationReport, Verdict, DEFAULT_TOL};
use finsler_core::cli::check_suite;
use finsler_core::dsl::MetricSpec;
use finsler_core::geometry::{ConnectionBundle, CovDerivs};
use finsler_core::sample::{SamplePlan, TangentSample};
use finsler_core::tensor::{Tensor, C};
use finsler_core::zoo::{self, ZooParams, IDS};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn plan(z: usize, eta: usize) -> SamplePlan {
    SamplePlan {
        z_count: z,
        eta_count: eta,
        ..SamplePlan::default()
    }
}

fn zoo_default(id: &str) -> MetricSpec {
    zoo::make_default(id).expect("zoo entry builds")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report(spec: &MetricSpec, p: &SamplePlan) -> Result<ClassificationReport, String> {
    classify(spec, p, DEFAULT_TOL).map_err(|e| format!("{}: {}", spec.name, e))
}

fn aggregate(r: &ClassificationReport, id: &str) -> Result<f64, String> {
    r.predicate(id)
        .map(|p| p.aggregate)
        .ok_or_else(|| format!("{}: no predicate {}", r.metric, id))
}

fn class_is(r: &ClassificationReport, class: &str, want: Verdict) -> Result<(), String> {
    let got = r.class(class);
    ensure(got == Some(want), || {
        format!("{}: {} is {:?}, expected {:?}", r.metric, class, got, want)
    })
}

fn bundles(spec: &MetricSpec, p: &SamplePlan) -> Vec<(TangentSample, ConnectionBundle)> {
    let l = spec.assemble_l();
    spec.samples(p)
        .expect("samples")
        .flat()
        .into_iter()
        .map(|s| {
            let b = ConnectionBundle::compute(&l, &s).expect("bundle");
            (s, b)
        })
        .collect()
}

fn max_diff(a: &Tensor, b: &Tensor) -> f64 {
    a.sub(b).max_abs()
}

fn flat_nullity() -> Outcome {
    let spec = zoo_default("flat");
    let p = plan(8, 8);
    let mut worst = 0.0f64;
    for (_, b) in bundles(&spec, &p) {
        let cd = CovDerivs::compute(&b);
        let d = &b.d;
        let mut tensors = vec![
            &b.c, &b.cbar, &b.n, &b.cn, &b.dnbar, &b.dgbar, &b.l_cf, &b.c_cf, &b.bl, &b.blbar, &b.cl, &b.clbar,
            &b.torsion,
        ];
        tensors.extend([
            &d.dz_g,
            &d.dzbar_g,
            &d.dz_c,
            &d.dzbar_c,
            &d.dz_cbar,
            &d.deta_c,
            &d.detabar_c,
            &d.deta_cbar,
            &d.d_lcf,
            &d.d_lcf_bar,
            &d.d_bl,
            &d.d_bl_bar,
            &d.d_blbar,
            &d.d_blbar_bar,
            &d.d_gb,
            &d.d_gb_bar,
            &d.g_b,
        ]);
        tensors.extend([
            &cd.c_cf_h,
            &cd.c_cf_hbar,
            &cd.c_cf_hbar_arg,
            &cd.c_b_h,
            &cd.c_b_hbar_arg,
            &cd.c_b_bar,
            &cd.g_b,
            &cd.g_cf,
            &cd.g_cf_bar,
        ]);
        for t in tensors {
            worst = worst.max(t.max_abs());
        }
        worst = worst.max(b.spray.iter().map(|x| x.norm()).fold(0.0, f64::max));
    }
    ensure(worst < 1e-12, || format!("coefficient max {worst:e}"))?;
    let r = report(&spec, &p)?;
    let res = r.predicates.iter().map(|q| q.aggregate).fold(0.0, f64::max);
    let nan = r.predicates.iter().any(|q| q.aggregate.is_nan());
    ensure(res < 1e-12 && !nan, || format!("classification residual max {res:e}"))?;
    Ok(format!("coefficients {worst:.1e}, residuals {res:.1e}, 64 samples"))
}

fn suite_max(spec: &MetricSpec, suite: &str, p: &SamplePlan) -> Result<(f64, BTreeMap<String, f64>), String> {
    let rows = check_suite(spec, suite, p).map_err(|e| format!("{}: {}", spec.name, e))?;
    let mut worst = 0.0f64;
    let mut info = BTreeMap::new();
    for (_, r) in rows {
        for x in r {
            if x.informational {
                let e = info.entry(x.id).or_insert(0.0f64);
                *e = e.max(x.residual);
            } else if x.residual.is_nan() {
                return Err(format!("{}: {} is NaN", spec.name, x.id));
            } else {
                worst = worst.max(x.residual);
            }
        }
    }
    Ok((worst, info))
}

fn homogeneity_compat() -> Outcome {
    let p = plan(8, 8);
    let mut worst = 0.0f64;
    for id in IDS {
        let spec = zoo_default(id);
        for suite in ["homogeneity", "eq1.3"] {
            let (w, _) = suite_max(&spec, suite, &p)?;
            ensure(w < 1e-8, || format!("{id} {suite}: {w:e}"))?;
            worst = worst.max(w);
        }
    }
    Ok(format!("max {worst:.1e} over 7 entries x 64 samples"))
}

fn lemma_suite() -> Outcome {
    let p = plan(4, 4);
    let mut worst = 0.0f64;
    let mut literal = Vec::new();
    for id in IDS {
        let spec = zoo_default(id);
        for suite in ["lemma2.1", "lemma2.2"] {
            let (w, info) = suite_max(&spec, suite, &p)?;
            ensure(w < 1e-7, || format!("{id} {suite}: {w:e}"))?;
            worst = worst.max(w);
            for (k, v) in info {
                literal.push(format!("{id}:{k}={v:.1e}"));
            }
        }
    }
    println!("    lemma2.2 v index reading, literal form: {}", literal.join(" "));
    Ok(format!("max {worst:.1e} over 7 entries x 16 samples"))
}

fn antonelli_shimada() -> Outcome {
    let spec = zoo_default("antonelli_shimada");
    let p = plan(4, 4);
    let mut worst = 0.0f64;
    for (s, b) in bundles(&spec, &p) {
        let (zb, wb) = (s.z[0].conj(), s.z[1].conj());
        // L^i_{jk} at [i, j, k]
        for (ix, want) in [([0, 0, 0], zb), ([1, 1, 0], zb), ([0, 0, 1], wb), ([1, 1, 1], wb)] {
            let got = b.l_cf[ix];
            let rel = (got - want).norm() / want.norm().max(1e-12);
            worst = worst.max(rel);
        }
    }
    ensure(worst < 1e-8, || format!("relative error {worst:e}"))?;
    let r = report(&spec, &plan(8, 8))?;
    class_is(&r, "generalized_berwald", Verdict::Holds)?;
    Ok(format!("relative error {worst:.1e}, generalized_berwald holds"))
}

fn kahler_chain() -> Outcome {
    let spec = zoo_default("hermitian_kahler_potential");
    let p = plan(8, 8);
    let r = report(&spec, &p)?;
    let k = aggregate(&r, "kahler")?;
    ensure(k < 1e-8, || format!("kahler residual {k:e}"))?;
    let mut worst = 0.0f64;
    for (_, b) in bundles(&spec, &p) {
        worst = worst
            .max(max_diff(&b.l_cf, &b.cl))
            .max(max_diff(&b.l_cf, &b.bl))
            .max(b.clbar.max_abs());
    }
    ensure(worst < 1e-8, || format!("L_cf/cL/BL/cLbar {worst:e}"))?;
    for class in zoo::CLASSES {
        class_is(&r, class, Verdict::Holds)?;
    }
    Ok(format!("kahler {k:.1e}, coefficients {worst:.1e}, all 7 classes hold"))
}

const IFF_GROUPS: [&str; 9] = [
    "thm3.1", "thm3.2", "thm3.3", "thm3.4", "thm3.6", "thm4.2", "prop4.3", "prop4.4", "lemma3.1",
];

fn equivalence_consistency() -> Outcome {
    let p = plan(8, 8);
    let mut checked = 0;
    for id in IDS {
        let r = report(&zoo_default(id), &p)?;
        for c in r.crosschecks.iter().filter(|c| c.kind == "equivalence") {
            ensure(c.consistent, || format!("{id}: {} split", c.theorem))?;
            if IFF_GROUPS.contains(&c.theorem.as_str()) {
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} listed groups consistent across 7 entries"))
}

fn crosscheck_ok(r: &ClassificationReport, theorem: &str) -> Result<(), String> {
    let c = r
        .crosschecks
        .iter()
        .find(|c| c.theorem == theorem)
        .ok_or_else(|| format!("{}: no crosscheck {theorem}", r.metric))?;
    ensure(c.consistent, || format!("{}: {theorem} split", r.metric))
}

fn randers() -> Outcome {
    let p = plan(8, 8);
    let constant = report(&zoo_default("randers"), &p)?;
    class_is(&constant, "generalized_berwald", Verdict::Holds)?;
    let scalar = aggregate(&constant, "thm4.2.scalar")?;
    ensure(scalar < 1e-10, || format!("thm4.2 scalar {scalar:e}"))?;
    let params = ZooParams {
        b: Some("z1^2,0".into()),
        ..Default::default()
    };
    let spec = zoo::make("randers", &params).map_err(|e| e.to_string())?;
    let varying = report(&spec, &p)?;
    class_is(&varying, "generalized_berwald", Verdict::Fails)?;
    ensure(varying.verdict("thm4.2.scalar") == Some(Verdict::Fails), || {
        "b=(z1^2,0): thm4.2.scalar does not fail".into()
    })?;
    for r in [&constant, &varying] {
        crosscheck_ok(r, "thm4.2")?;
        crosscheck_ok(r, "thm4.3")?;
    }
    Ok(format!(
        "constant b scalar {scalar:.1e}; b=(z1^2,0) fails both sides; thm4.3 consistent"
    ))
}

fn kropina() -> Outcome {
    let p = plan(8, 8);
    let constant = report(&zoo_default("kropina"), &p)?;
    let scalar = aggregate(&constant, "prop4.3.scalar")?;
    let spray = aggregate(&constant, "prop4.3.spray")?;
    ensure(scalar < 1e-10, || format!("prop4.3 scalar {scalar:e}"))?;
    ensure(spray < 1e-9, || format!("|G - aG| {spray:e}"))?;
    let params = ZooParams {
        a: Some("1,0;0,1+z2*conj(z2)".into()),
        ..Default::default()
    };
    let spec = zoo::make("kropina", &params).map_err(|e| e.to_string())?;
    let kahler_alpha = report(&spec, &p)?;
    ensure(kahler_alpha.verdict("alpha.kahler") == Some(Verdict::Holds), || {
        "alpha is not Kähler".into()
    })?;
    class_is(&kahler_alpha, "complex_berwald", Verdict::Holds)?;
    crosscheck_ok(&kahler_alpha, "thm4.5")?;
    Ok(format!(
        "scalar {scalar:.1e}, |G - aG| {spray:.1e}, Kähler alpha gives complex_berwald"
    ))
}

fn ad_integrity() -> Outcome {
    let p = plan(4, 8);
    let (mut fd_worst, mut conj_worst) = (0.0f64, 0.0f64);
    let mut count = 0usize;
    for id in IDS {
        let spec = zoo_default(id);
        let l = spec.assemble_l();
        let indices = MultiIndex::all_up_to(spec.dim, 2);
        for s in spec.samples(&p).map_err(|e| e.to_string())?.flat() {
            let values = derive(&l, &s, &indices).map_err(|e| e.to_string())?;
            for m in &indices {
                let step = if m.order() == 1 { 1e-5 } else { 1e-3 };
                let chk = fd_check(&l, &s, m, step).map_err(|e| format!("{id}: {e}"))?;
                fd_worst = fd_worst.max(chk.residual);
                let a = values.get(m).expect("requested");
                let b = values.get(&m.conj_swapped()).expect("closed under conjugation");
                conj_worst = conj_worst.max((a - b.conj()).norm() / a.norm().max(1.0));
                count += 1;
            }
        }
        ensure(fd_worst < 1e-6, || format!("{id}: fd residual {fd_worst:e}"))?;
        ensure(conj_worst < 1e-10, || {
            format!("{id}: conjugation residual {conj_worst:e}")
        })?;
    }
    Ok(format!(
        "fd {fd_worst:.1e}, conjugation {conj_worst:.1e}, {count} derivatives"
    ))
}

fn change_of_coordinates() -> Tensor {
    Tensor::from_fn(2, 2, |ix| match (ix[0], ix[1]) {
        (0, 0) => C::new(1.0, 0.0),
        (0, 1) => C::new(0.3, 0.2),
        (1, 0) => C::new(0.0, -0.1),
        _ => C::new(0.8, 0.0),
    })
}

fn invariance() -> Outcome {
    let p = plan(8, 8);
    let a = change_of_coordinates();
    let b_inv = finsler_core::dsl::metric::invert_general(&a).map_err(|e| e.to_string())?;
    let mut bl_worst = 0.0f64;
    for id in IDS {
        let spec = zoo_default(id);
        let base = report(&spec, &p)?;
        let moved = spec.transformed(&a).map_err(|e| e.to_string())?;
        for other in [spec.scaled(2.0), moved.clone()] {
            let r = report(&other, &p)?;
            ensure(r.lattice == base.lattice, || {
                format!("{}: lattice {:?} vs {:?}", other.name, r.lattice, base.lattice)
            })?;
        }
        // BL'^i_{jk} = A_ir BL^r_sq B_sj B_qk for linear A, B = A^-1
        let (l, l2) = (spec.assemble_l(), moved.assemble_l());
        for s in spec.samples(&plan(2, 2)).map_err(|e| e.to_string())?.flat() {
            let b = ConnectionBundle::compute(&l, &s).map_err(|e| e.to_string())?;
            let b2 = ConnectionBundle::compute(&l2, &s.transformed(&a)).map_err(|e| e.to_string())?;
            let want = Tensor::from_fn(2, 3, |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                let mut acc = C::new(0.0, 0.0);
                for r in 0..2 {
                    for s in 0..2 {
                        for q in 0..2 {
                            acc += a[[i, r]] * b.bl[[r, s, q]] * b_inv[[s, j]] * b_inv[[q, k]];
                        }
                    }
                }
                acc
            });
            bl_worst = bl_worst.max(max_diff(&want, &b2.bl) / (1.0 + b.bl.max_abs()));
        }
    }
    ensure(bl_worst < 1e-9, || format!("BL covariance {bl_worst:e}"))?;
    Ok(format!(
        "lattices unchanged under L -> 2L and z' = Az; BL covariance {bl_worst:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("flat-metric nullity", flat_nullity),
        ("homogeneity and compatibility", homogeneity_compat),
        ("lemma suite", lemma_suite),
        ("antonelli-shimada closed form", antonelli_shimada),
        ("kahler chain", kahler_chain),
        ("equivalence consistency", equivalence_consistency),
        ("randers biconditionals", randers),
        ("kropina", kropina),
        ("ad integrity", ad_integrity),
        ("invariance", invariance),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}; {secs:.1}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why}; {secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
