use serde::{Deserialize, Serialize};

use super::{integerize, integrality_failures, CayleyCoefficients, PlantSpec, RegulatorSolution, StabilityCheck};
use crate::exactmath::{format_rational, rational_to_f64, spectral_radius, vector, Rational};
use crate::simloop::InitialConditions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignReport {
    pub rows: Vec<CheckRow>,
}

impl DesignReport {
    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.status == CheckStatus::Fail)
    }

    pub fn row(&self, check: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.check == check)
    }

    fn push(&mut self, check: impl Into<String>, status: CheckStatus, detail: impl Into<String>) {
        self.rows.push(CheckRow {
            check: check.into(),
            status,
            detail: detail.into(),
        });
    }
}

/// Runs every synthesis check and records the outcome; never fails.
pub fn validate_design(
    spec: &PlantSpec,
    reg: Option<&RegulatorSolution>,
    gamma: &Rational,
    s: &Rational,
    l0: &Rational,
    initial: Option<&InitialConditions>,
) -> DesignReport {
    use CheckStatus::*;
    let mut report = DesignReport { rows: Vec::new() };

    let dims = match spec.dims() {
        Ok(d) => {
            report.push("dimensions", Pass, format!("n={}, w={}, v={}", d.n, d.w, d.v));
            d
        }
        Err(e) => {
            report.push("dimensions", Fail, e.to_string());
            return report;
        }
    };

    let stab = StabilityCheck::evaluate(spec, gamma);
    for (name, rho) in [("rho(A+BK) < 1", stab.rho_a_bk), ("rho(A-LC) < 1", stab.rho_a_lc)] {
        let status = if rho < 1.0 { Pass } else { Warn };
        report.push(name, status, format!("estimate {rho:.12}"));
    }
    let rho_s = spectral_radius(&spec.s);
    if rho_s >= 1.0 - super::STABILITY_TOLERANCE {
        report.push("rho(S) >= 1", Pass, format!("estimate {rho_s:.12}"));
    } else {
        report.push(
            "rho(S) >= 1",
            Warn,
            format!("estimate {rho_s:.12}; the reference decays, stabilization suffices"),
        );
    }
    let margin = if stab.violated() {
        Fail
    } else if stab.waiver {
        Warn
    } else {
        Pass
    };
    report.push(
        "gamma above spectral-radius floor",
        margin,
        format!(
            "gamma={} floor={:.12}{}",
            format_rational(gamma),
            stab.floor,
            if stab.waiver { " (equal within tolerance, waived)" } else { "" }
        ),
    );
    let g = rational_to_f64(gamma);
    let sf = rational_to_f64(s);
    let range = |x: f64| x > 0.0 && x < 1.0;
    report.push(
        "gamma, s in (0, 1)",
        if range(g) && range(sf) { Pass } else { Fail },
        format!("gamma={}, s={}", format_rational(gamma), format_rational(s)),
    );

    let Some(reg) = reg else {
        report.push("regulator equations", Fail, "no solution");
        return report;
    };
    let (r1, r2) = reg.residuals(spec);
    report.push(
        "regulator residuals exactly zero",
        if r1.is_zero() && r2.is_zero() { Pass } else { Fail },
        "Gamma S - A Gamma - B V and C Gamma - I",
    );
    if !reg.unique {
        report.push("regulator uniqueness", Warn, "rank deficient; one solution selected");
    }

    let mut s_gamma_int = None;
    for (name, bad) in integrality_failures(spec, reg, gamma, s) {
        if bad.is_empty() {
            report.push(format!("integer {name}"), Pass, "all entries integer");
        } else {
            let list = bad.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
            report.push(format!("integer {name}"), Fail, list);
        }
        if name == "S/gamma" && bad.is_empty() {
            s_gamma_int = spec.s.scale(&gamma.recip()).to_integer();
        }
    }
    match s_gamma_int {
        Some(sg) => {
            let c = CayleyCoefficients::of(&sg);
            let zero = c.residual(&sg).is_zero();
            report.push(
                "Cayley-Hamilton residual exactly zero",
                if zero { Pass } else { Fail },
                format!("C_v = {:?}", c.c.iter().map(ToString::to_string).collect::<Vec<_>>()),
            );
        }
        None => report.push("Cayley-Hamilton residual exactly zero", Fail, "S/gamma is not integer"),
    }

    if let Some(ic) = initial {
        let scale = s / l0;
        for (name, x, len) in [("x~(0)", &ic.x_hat0, dims.n), ("v~(0)", &ic.v_hat0, dims.v)] {
            let scaled = vector::scale(&scale, x);
            let ok = x.len() == len && scaled.iter().all(|e| e.is_integer());
            report.push(
                format!("integer {name}"),
                if ok { Pass } else { Fail },
                format!("s/l0 times the estimate, length {}", x.len()),
            );
        }
        for (name, x, bound) in [("x_p(0)", &ic.x_p0, &spec.c_xp0), ("v_p(0)", &ic.v_p0, &spec.c_vp0)] {
            let norm = vector::inf_norm(x);
            report.push(
                format!("||{name}|| within bound"),
                if &norm <= bound { Pass } else { Warn },
                format!("{} vs {}", format_rational(&norm), format_rational(bound)),
            );
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    #[serde(with = "crate::exactmath::serde_rational")]
    pub gamma: Rational,
    #[serde(with = "crate::exactmath::serde_rational")]
    pub s: Rational,
    pub accepted: bool,
    pub waiver: bool,
    pub reason: Option<String>,
}

/// Tries each user-supplied `(γ, s)` pair in order. No search is performed.
pub fn screen_candidates(
    spec: &PlantSpec,
    reg: &RegulatorSolution,
    candidates: &[(Rational, Rational)],
    l0: &Rational,
) -> Vec<CandidateOutcome> {
    candidates
        .iter()
        .map(|(g, s)| match integerize(spec, reg, g, s, l0) {
            Ok(art) => CandidateOutcome {
                gamma: g.clone(),
                s: s.clone(),
                accepted: true,
                waiver: art.stability.waiver,
                reason: None,
            },
            Err(e) => CandidateOutcome {
                gamma: g.clone(),
                s: s.clone(),
                accepted: false,
                waiver: false,
                reason: Some(e.to_string()),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::fixtures::{m, ramp};
    use crate::design::solve_regulator;
    use crate::exactmath::{int, rat};

    #[test]
    fn ramp_report_passes_with_waiver() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        let ic = InitialConditions {
            x_p0: vec![int(1), int(1)],
            v_p0: vec![int(1), int(0)],
            x_hat0: vec![int(0), int(0)],
            v_hat0: vec![int(0), int(0)],
        };
        let r = validate_design(&spec, Some(&reg), &rat(1, 2), &rat(1, 2), &int(1), Some(&ic));
        assert!(!r.has_failures(), "{r:#?}");
        assert_eq!(r.row("gamma above spectral-radius floor").unwrap().status, CheckStatus::Warn);
        assert!(r
            .rows
            .iter()
            .filter(|row| row.check.starts_with("integer "))
            .all(|row| row.status == CheckStatus::Pass));
        assert_eq!(r.row("Cayley-Hamilton residual exactly zero").unwrap().status, CheckStatus::Pass);
    }

    #[test]
    fn one_third_lists_integrality_failures() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        let r = validate_design(&spec, Some(&reg), &rat(1, 3), &rat(1, 2), &int(1), None);
        let row = r.row("integer (A-LC)/gamma").unwrap();
        assert_eq!(row.status, CheckStatus::Fail);
        assert!(row.detail.contains("-3/2"));
        assert!(r.has_failures());
    }

    #[test]
    fn decaying_reference_warns() {
        let mut spec = ramp();
        spec.s = m(vec![vec![rat(1, 2), int(0)], vec![int(0), rat(1, 2)]]);
        let reg = solve_regulator(&spec).unwrap();
        let r = validate_design(&spec, Some(&reg), &rat(1, 2), &rat(1, 2), &int(1), None);
        let row = r.row("rho(S) >= 1").unwrap();
        assert_eq!(row.status, CheckStatus::Warn);
        assert!(row.detail.contains("stabilization suffices"));
    }

    #[test]
    fn non_integer_initial_estimate_fails() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        let ic = InitialConditions {
            x_p0: vec![int(1), int(1)],
            v_p0: vec![int(1), int(0)],
            x_hat0: vec![int(1), int(0)],
            v_hat0: vec![int(0), int(0)],
        };
        let r = validate_design(&spec, Some(&reg), &rat(1, 2), &rat(1, 2), &int(1), Some(&ic));
        assert_eq!(r.row("integer x~(0)").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn screening_keeps_order() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        let out = screen_candidates(
            &spec,
            &reg,
            &[(rat(1, 3), rat(1, 2)), (rat(1, 2), rat(1, 2)), (rat(1, 2), rat(1, 4))],
            &int(1),
        );
        assert_eq!(out.iter().map(|o| o.accepted).collect::<Vec<_>>(), vec![false, true, false]);
        assert!(out[1].waiver);
        assert!(out[0].reason.as_deref().unwrap().contains("(A-LC)/gamma"));
        assert!(out[2].reason.as_deref().unwrap().contains("sB/gamma"));
    }
}
