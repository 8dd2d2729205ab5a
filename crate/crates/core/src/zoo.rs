//! Named metrics with default parameters and expected classifications.

use crate::dsl::{MetricFile, MetricSpec};
use crate::error::{Error, Result};

pub const IDS: [&str; 7] = [
    "flat",
    "hermitian_kahler_potential",
    "hermitian_nonkahler",
    "antonelli_shimada",
    "randers",
    "kropina",
    "local_minkowski",
];

pub const DEFAULT_SIGMA: &str = "(z1*conj(z1)+z2*conj(z2))/2";

/// Overrides for a zoo entry. `a` is `;`-separated rows of `,`-separated
/// entries, `b` is `,`-separated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZooParams {
    pub dim: Option<usize>,
    pub sigma: Option<String>,
    pub a: Option<String>,
    pub b: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZooEntry {
    pub id: &'static str,
    pub summary: &'static str,
    /// `(class, holds)` pairs expected at default parameters.
    pub expected: Vec<(&'static str, bool)>,
}

pub const CLASSES: [&str; 7] = [
    "kahler",
    "weakly_kahler",
    "landsberg",
    "g_landsberg",
    "strong_landsberg",
    "generalized_berwald",
    "complex_berwald",
];

fn all_hold() -> Vec<(&'static str, bool)> {
    CLASSES.iter().map(|c| (*c, true)).collect()
}

pub fn entry(id: &str) -> Result<ZooEntry> {
    let (id, summary, expected) = match id {
        "flat" => ("flat", "Euclidean metric, a = identity", all_hold()),
        "hermitian_kahler_potential" => (
            "hermitian_kahler_potential",
            "Fubini-Study metric, a = ddbar log(1 + |z|^2)",
            all_hold(),
        ),
        "hermitian_nonkahler" => (
            "hermitian_nonkahler",
            "a = diag(exp(|z2|^2), 1)",
            vec![
                ("kahler", false),
                ("weakly_kahler", false),
                ("landsberg", true),
                ("g_landsberg", true),
                ("strong_landsberg", true),
                ("generalized_berwald", true),
                ("complex_berwald", false),
            ],
        ),
        "antonelli_shimada" => (
            "antonelli_shimada",
            "L = exp(2 sigma) sqrt(|eta1|^4 + |eta2|^4)",
            vec![
                ("kahler", false),
                ("weakly_kahler", false),
                ("landsberg", false),
                ("generalized_berwald", true),
                ("complex_berwald", false),
            ],
        ),
        "randers" => ("randers", "F = alpha + |beta|, a = identity, b = (0.3, 0)", all_hold()),
        "kropina" => ("kropina", "F = alpha^2 / |beta|, a = identity, b = (1, 0)", all_hold()),
        "local_minkowski" => ("local_minkowski", "L = sqrt(sum |eta_i|^4)", all_hold()),
        other => return Err(Error::UnknownZooId(other.into())),
    };
    Ok(ZooEntry { id, summary, expected })
}

fn identity_rows(n: usize) -> Vec<Vec<String>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }.to_string()).collect())
        .collect()
}

fn fubini_study(n: usize) -> Vec<Vec<String>> {
    let s = format!(
        "(1+{})",
        (1..=n)
            .map(|k| format!("z{k}*conj(z{k})"))
            .collect::<Vec<_>>()
            .join("+")
    );
    (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    let off = format!("conj(z{i})*z{j}/{s}^2");
                    if i == j {
                        format!("1/{s}-{off}")
                    } else {
                        format!("-{off}")
                    }
                })
                .collect()
        })
        .collect()
}

fn parse_rows(csv: &str) -> Vec<Vec<String>> {
    csv.split(';')
        .map(|r| r.split(',').map(|e| e.trim().to_string()).collect())
        .collect()
}

fn parse_list(csv: &str) -> Vec<String> {
    csv.split(',').map(|e| e.trim().to_string()).collect()
}

fn unit_b(n: usize, first: &str) -> Vec<String> {
    (0..n).map(|i| if i == 0 { first } else { "0" }.to_string()).collect()
}

/// The zoo entry as a metric file, before parsing and validation.
pub fn file(id: &str, params: &ZooParams) -> Result<MetricFile> {
    entry(id)?;
    let n = params.dim.unwrap_or(2);
    let a = params.a.as_deref().map(parse_rows);
    let b = params.b.as_deref().map(parse_list);
    let mut f = MetricFile {
        name: id.to_string(),
        dimension: n,
        kind: "hermitian".into(),
        a: None,
        b: None,
        sigma: None,
        l: None,
        base_point: None,
    };
    match id {
        "flat" => f.a = Some(a.unwrap_or_else(|| identity_rows(n))),
        "hermitian_kahler_potential" => f.a = Some(a.unwrap_or_else(|| fubini_study(n))),
        "hermitian_nonkahler" => {
            f.a = Some(a.unwrap_or_else(|| {
                let mut rows = identity_rows(n);
                rows[0][0] = "exp(z2*conj(z2))".into();
                rows
            }))
        }
        "antonelli_shimada" => {
            f.kind = "antonelli_shimada".into();
            f.sigma = Some(params.sigma.clone().unwrap_or_else(|| DEFAULT_SIGMA.into()));
        }
        "randers" | "kropina" => {
            f.kind = id.into();
            f.a = Some(a.unwrap_or_else(|| identity_rows(n)));
            let first = if id == "randers" { "0.3" } else { "1" };
            f.b = Some(b.unwrap_or_else(|| unit_b(n, first)));
        }
        "local_minkowski" => {
            f.kind = "custom".into();
            let sum = (1..=n).map(|k| format!("abs2(eta{k})^2")).collect::<Vec<_>>().join("+");
            f.l = Some(format!("sqrt({sum})"));
        }
        _ => unreachable!("checked by entry()"),
    }
    Ok(f)
}

/// Builds and validates a zoo metric.
pub fn make(id: &str, params: &ZooParams) -> Result<MetricSpec> {
    let spec = file(id, params)?.to_spec()?;
    spec.validate()?;
    Ok(spec)
}

pub fn make_default(id: &str) -> Result<MetricSpec> {
    make(id, &ZooParams::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::load_metric;

    #[test]
    fn every_entry_validates_and_round_trips() {
        for id in IDS {
            let spec = make_default(id).unwrap();
            let back = load_metric(&spec.to_json()).unwrap();
            let s = crate::sample::TangentSample::new(
                vec![C::new(0.1, 0.2), C::new(-0.3, 0.05)],
                vec![C::new(0.7, -0.2), C::new(0.4, 0.5)],
            );
            let l1 = spec.assemble_l().eval_at(&s.z, &s.eta).unwrap();
            let l2 = back.assemble_l().eval_at(&s.z, &s.eta).unwrap();
            assert!((l1 - l2).norm() < 1e-12 * l1.norm(), "{id}");
        }
    }

    use num_complex::Complex64 as C;

    #[test]
    fn errors() {
        assert!(matches!(make_default("nope"), Err(Error::UnknownZooId(_))));
        let p = ZooParams {
            b: Some("0,0".into()),
            ..Default::default()
        };
        assert!(matches!(make("kropina", &p), Err(Error::Validation { .. })));
    }

    #[test]
    fn fubini_study_three_dims() {
        let p = ZooParams {
            dim: Some(3),
            ..Default::default()
        };
        assert_eq!(make("hermitian_kahler_potential", &p).unwrap().dim, 3);
    }
}
