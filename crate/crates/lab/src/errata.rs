use gtl_core::bilinear::{toda_bilinear_residual, BilinearVariant, SeriesFn};
use gtl_core::dynamics::{
    cdw_rhs_via_symmetric_lax, gtl_printed_discrepancy, rhs, rhs_from_lax, rhs_with, CdwCoupling, FlowId, RhsOptions,
};
use gtl_core::lax::{discrete_lax_residual, LaxRep, TlConvention};
use gtl_core::model::{cdw_from_n3, Boundary, GtlState, N3QState, N3State, TodaState};
use gtl_core::poisson::{ham_flow_residual, CasimirC2, Observable, C2_P2_COEFFICIENT, N3_KAPPA, PRINTED_C2_P2_COEFFICIENT, PRINTED_N3_KAPPA};
use gtl_core::{Error, State};

use crate::report::Erratum;

fn max_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

fn entry(name: &str, printed: &str, adopted: &str, values: (f64, f64), verdict: &str) -> Erratum {
    Erratum {
        name: name.into(),
        printed: printed.into(),
        adopted: adopted.into(),
        printed_value: values.0.is_finite().then_some(values.0),
        oracle_value: values.1.is_finite().then_some(values.1),
        verdict: verdict.into(),
    }
}

fn probe_n3() -> N3State {
    N3State::new([0.4, -0.2, 0.1], [0.9, 1.3], 0.7)
}

fn probe_gtl() -> GtlState {
    GtlState::new(
        2,
        vec![0.3, -0.5, 0.2, 0.6, -0.1],
        vec![0.8, 1.1, 0.7, 0.5],
        vec![0.6, 0.9, 1.2, 0.4],
        0.45,
        -0.35,
    )
    .expect("valid probe")
}

fn u_dot_index() -> gtl_core::Result<Erratum> {
    let rows = gtl_printed_discrepancy(&probe_gtl())?;
    let (_, printed, oracle) = rows.into_iter().find(|(n, _, _)| n == "u").expect("u slot");
    Ok(entry(
        "gtl.u_dot_index",
        "u' = (p_2 - p_4) u",
        "u' = (p_{-1} - p_1) u, v' = (p_{-1} - p_1) v (commutator projection)",
        (printed, oracle),
        "typo: the printed sites do not touch the coupled bond; values are u' at the probe state",
    ))
}

fn bracket_coefficient() -> gtl_core::Result<Erratum> {
    let s = State::N3(probe_n3());
    Ok(entry(
        "n3.bracket_a1a2_coefficient",
        "{a1, a2} = 2u",
        "{a1, a2} = u",
        (ham_flow_residual(&s, PRINTED_N3_KAPPA)?, ham_flow_residual(&s, N3_KAPPA)?),
        "printed coefficient over-produces the coupling term; values are max |{H2,x} - x'|",
    ))
}

fn casimir_coefficient() -> gtl_core::Result<Erratum> {
    let s = State::N3(probe_n3());
    let x = s.to_vec();
    let xdot = rhs(&s, FlowId::N3)?.to_vec();
    let rate = |c: f64| {
        let g = CasimirC2 { p2_coefficient: c }.gradient(&x);
        g.iter().zip(&xdot).map(|(a, b)| a * b).sum::<f64>().abs()
    };
    Ok(entry(
        "n3.casimir_c2_p2_coefficient",
        "C2 = a1 a2 / u - 2 p2",
        "C2 = a1 a2 / u - p2",
        (rate(PRINTED_C2_P2_COEFFICIENT), rate(C2_P2_COEFFICIENT)),
        "typo: only coefficient 1 is conserved; values are |dC2/dt|",
    ))
}

fn u_reconstruction() -> gtl_core::Result<Erratum> {
    let q = N3QState { q: [0.3, -0.1, -0.4], p: [0.5, 0.1, -0.2], p4: 0.8, q4: 1.1, u0: 0.6, alpha: 0.0 };
    let q13 = q.q[0] - q.q[2];
    let p13 = q.p[0] - q.p[2];
    let printed_u = q.u0 + q13.exp();
    let printed = (p13 * q13.exp() - p13 * printed_u).abs();
    let adopted = (p13 * q.u() - p13 * q.u()).abs();
    Ok(entry(
        "n3q.u_reconstruction",
        "u = u0 + exp(q13)",
        "u = u0 exp(q13)",
        (printed, adopted),
        "the sum does not satisfy u' = p13 u unless u0 = 0; values are |d/dt u - p13 u|",
    ))
}

fn bilinear_constant_term() -> gtl_core::Result<Erratum> {
    let one = SeriesFn::constant(0.0, 1.0, 8);
    let printed = toda_bilinear_residual(&one, &one, &one, BilinearVariant::Printed)?.max_abs();
    let standard = toda_bilinear_residual(&one, &one, &one, BilinearVariant::Standard)?.max_abs();
    Ok(entry(
        "toda.tau_bilinear_constant_term",
        "tau tau'' - tau'^2 = tau_{n+1} tau_{n-1}",
        "tau tau'' - tau'^2 = tau_{n+1} tau_{n-1} - tau^2 (both variants exposed)",
        (printed, standard),
        "printed form omits -tau^2; exp(t^2/2) solves the printed form, the vacuum tau = 1 solves the standard one; values are vacuum residuals",
    ))
}

fn b_dot_variable() -> gtl_core::Result<Erratum> {
    let (a_prev, a) = (0.7f64, 1.2f64);
    let alpha = |x: f64| 4.0 * x * x;
    let printed = 2.0 * (alpha(a).powi(2) - alpha(a_prev).powi(2));
    let adopted = 2.0 * (a * a - a_prev * a_prev);
    Ok(entry(
        "toda.ab_form_b_dot",
        "b_n' = 2(alpha_n^2 - alpha_{n-1}^2)",
        "b_n' = 2(a_n^2 - a_{n-1}^2)",
        (printed, adopted),
        "typo: alpha for a; values are b_n' at a_{n-1} = 0.7, a_n = 1.2",
    ))
}

fn discrete_pair() -> gtl_core::Result<Erratum> {
    let s = TodaState::new(vec![0.4, -0.3, 0.2, 0.1], vec![0.2, -0.1, 0.3, -0.4], Boundary::Open)?;
    let d = rhs(&State::Toda(s.clone()), FlowId::TlQp)?;
    let State::Toda(d) = d else { unreachable!() };
    let printed = discrete_lax_residual(&s, 0.7, &d.q, &d.p, TlConvention::Printed)?;
    let consistent = discrete_lax_residual(&s, 0.7, &d.q, &d.p, TlConvention::Consistent)?;
    Ok(entry(
        "tl2x2.m_subdiagonal_index",
        "L_n = [[p_n + l, e^{q_n}], [-e^{-q_n}, 0]], M_n = [[0, -e^{q_n}], [e^{-q_n}, l]]",
        "L_n = [[l - p_n, e^{-q_n}], [-e^{q_n}, 0]], M_n = [[0, -e^{-q_n}], [e^{q_{n-1}}, l]]",
        (printed, consistent),
        "printed pair closes only at q = 0; values are max zero-curvature residuals away from it",
    ))
}

fn cdw_radicand() -> gtl_core::Result<Erratum> {
    let c = cdw_from_n3(&probe_n3());
    let s = State::Cdw(c);
    let oracle = State::Cdw(cdw_rhs_via_symmetric_lax(&c)?).to_vec();
    let with = |coupling| {
        rhs_with(&s, FlowId::Cdw, &RhsOptions { cdw_coupling: coupling, ..Default::default() }).map(|d| d.to_vec())
    };
    Ok(entry(
        "cdw.coupling_radicand",
        "d2' = c12 d2 - 2 sqrt(w d3), d3' = c23 d3 + 2 sqrt(w d2)",
        "d2' = c12 d2 - 2 s sqrt(w d2 d3), d3' = c23 d3 + 2 s sqrt(w d2 d3), s = sign(u a1 a2)",
        (max_diff(&with(CdwCoupling::Printed)?, &oracle), max_diff(&with(CdwCoupling::Corrected)?, &oracle)),
        "printed radicands disagree with the three-site flow; values are max deviation from it",
    ))
}

fn cdw_lax_closure() -> gtl_core::Result<Erratum> {
    let c = cdw_from_n3(&probe_n3());
    let value = match rhs_from_lax(&State::Cdw(c), LaxRep::Cdw) {
        Err(Error::NotClosed { value, .. }) => value.abs(),
        Err(e) => return Err(e),
        Ok(_) => 0.0,
    };
    Ok(entry(
        "cdw.lax_pair_closure",
        "L' = [L, M] for the squared-variable pair",
        "flow taken from the three-site system",
        (value, (c.c[0] - c.c[1]).abs()),
        "not closed in either commutator order: [L, M] has entry (1,0) = c1 - c2 outside the pattern; values are that entry and |c1 - c2|",
    ))
}

fn pq_flow() -> Erratum {
    entry(
        "pq.flow_inconsistency",
        "Q2' line printed twice, Q3' and Q4' missing, right sides in (p, a, u) rather than (P, Q)",
        "only the (P, Q) Lax matrix is built; no (P, Q) flow is integrated",
        (f64::NAN, f64::NAN),
        "internally inconsistent as printed; no oracle value exists",
    )
}

/// Every printed-equation discrepancy the oracles detect, evaluated at fixed
/// probe states.
pub fn errata() -> Vec<Erratum> {
    let computed: [fn() -> gtl_core::Result<Erratum>; 9] = [
        u_dot_index,
        bracket_coefficient,
        casimir_coefficient,
        u_reconstruction,
        bilinear_constant_term,
        b_dot_variable,
        discrete_pair,
        cdw_radicand,
        cdw_lax_closure,
    ];
    let mut out: Vec<Erratum> = computed
        .iter()
        .map(|f| f().unwrap_or_else(|e| entry("errata.evaluation_error", "", "", (f64::NAN, f64::NAN), &e.to_string())))
        .collect();
    out.push(pq_flow());
    out
}

/// Human-readable table of the ledger.
pub fn errata_table(rows: &[Erratum]) -> String {
    let mut out = String::new();
    for e in rows {
        out.push_str(&format!(
            "{}\n  printed: {}\n  adopted: {}\n  printed value: {}  adopted value: {}\n  verdict: {}\n",
            e.name,
            e.printed,
            e.adopted,
            e.printed_value.map_or("-".into(), crate::export::fmt_f64),
            e.oracle_value.map_or("-".into(), crate::export::fmt_f64),
            e.verdict
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_forms_are_flagged_and_adopted_forms_hold() {
        let rows = errata();
        assert!(rows.iter().all(|e| e.name != "errata.evaluation_error"), "{rows:?}");
        for e in &rows {
            if e.name == "pq.flow_inconsistency" || e.name == "cdw.lax_pair_closure" {
                continue;
            }
            let gap = (e.printed_value.unwrap() - e.oracle_value.unwrap()).abs();
            assert!(gap > 1e-3, "{}: {:?} vs {:?}", e.name, e.printed_value, e.oracle_value);
        }
        let get = |n: &str| rows.iter().find(|e| e.name == n).unwrap();
        for n in [
            "n3.bracket_a1a2_coefficient",
            "n3.casimir_c2_p2_coefficient",
            "n3q.u_reconstruction",
            "toda.tau_bilinear_constant_term",
            "tl2x2.m_subdiagonal_index",
            "cdw.coupling_radicand",
        ] {
            assert!(get(n).oracle_value.unwrap().abs() < 1e-12, "{n}: {:?}", get(n).oracle_value);
        }
        let c = get("cdw.lax_pair_closure");
        assert!((c.printed_value.unwrap() - c.oracle_value.unwrap()).abs() < 1e-12);
    }
}
