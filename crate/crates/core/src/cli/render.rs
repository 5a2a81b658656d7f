//! Text and structured (JSON) rendering of run reports.
//!
//! The structured document is the serde form of [`RunReport`]: every exact
//! integer is a decimal string, rationals are `"num/den"`, dyadics are
//! `{ "numerator": "...", "exponent": k }` meaning `numerator / 2^k`.
//! Timings are omitted so identical runs give byte-identical output.

use std::fmt::Write as _;

use num_rational::BigRational;

use super::pipeline::{Format, Outcome, RunReport};
use crate::dyadic::{rational_to_f64, Dyadic};

pub fn emit_report(report: &RunReport, format: Format) -> String {
    match format {
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => render_text(report),
    }
}

pub fn parse_structured(text: &str) -> serde_json::Result<RunReport> {
    serde_json::from_str(text)
}

fn row_dyadic(out: &mut String, name: &str, d: &Dyadic) {
    let _ = writeln!(out, "  {name:<14} {:<24} {:.6e}", d.to_string(), d.to_f64());
}

fn row_rational(out: &mut String, name: &str, r: &BigRational) {
    let _ = writeln!(
        out,
        "  {name:<14} {:<24} {:.6e}",
        r.to_string(),
        rational_to_f64(r)
    );
}

fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    let i = &r.instance;
    let _ = writeln!(out, "instance");
    let _ = writeln!(out, "  group          {} (n = {})", i.group, i.width);
    let _ = writeln!(out, "  generators     [{}]", i.generators.join(", "));
    let _ = writeln!(out, "  target         {}", i.target);
    let _ = writeln!(out, "  claimed order  {}", i.claimed_order);
    let _ = writeln!(
        out,
        "  epsilon        {}{}",
        i.epsilon,
        if i.default_epsilon { " (2^-(n+3))" } else { "" }
    );

    let s = &r.sampler;
    let _ = writeln!(out, "sampler");
    let _ = writeln!(
        out,
        "  steps          {} x {} bits = S {} (t {}), N = {}",
        s.steps, s.bits_per_step, s.s_bits, s.t_bits, s.branches
    );
    let _ = writeln!(out, "  |H|            {}", s.subgroup_order);
    let _ = writeln!(
        out,
        "  max deviation  {} ≈ {:.6e} ({} epsilon)",
        s.max_deviation,
        rational_to_f64(&s.max_deviation),
        if s.meets_epsilon { "<" } else { "≥" }
    );

    let p = &r.probabilities;
    let _ = writeln!(out, "probabilities ({:?})", r.mode);
    let _ = writeln!(out, "  {:<14} {:<24} decimal", "quantity", "exact");
    row_dyadic(&mut out, "P(p=1)", &p.p_post);
    row_dyadic(&mut out, "P(o=0,p=1)", &p.p_o0_joint);
    row_dyadic(&mut out, "P(o=1,p=1)", &p.p_o1_joint);
    row_rational(&mut out, "P(o=0|p=1)", &p.p_o0_given);
    row_rational(&mut out, "P(o=1|p=1)", &p.p_o1_given);
    let _ = writeln!(
        out,
        "  sum gamma^2 = {}   <h+|h+> = {}   <h-|h-> = {}",
        p.sum_gamma_sq, p.plus_norm, p.minus_norm
    );

    if let Some(c) = &r.comparison {
        if c.all_equal {
            let _ = writeln!(out, "brute force    all fields equal");
        } else {
            let _ = writeln!(out, "brute force    MISMATCH");
            for m in &c.mismatches {
                let _ = writeln!(out, "  {m}");
            }
        }
    }

    let c = &r.certificate;
    let _ = writeln!(out, "certificate");
    let _ = writeln!(out, "  g(w) = {}   q = {}", c.g_w, c.q);
    let _ = writeln!(out, "  G(w) = {}", c.big_g);
    let _ = writeln!(out, "  F(w) = {}", c.big_f);
    let _ = writeln!(
        out,
        "  ratio = {} ≈ {:.6}",
        c.ratio,
        rational_to_f64(&c.ratio)
    );
    let _ = writeln!(
        out,
        "  guard 3/(4(1+2^2n eps^2)^2) = {} ≈ {:.6}",
        c.guard_value,
        rational_to_f64(&c.guard_value)
    );
    let _ = writeln!(out, "  {}", c.threshold_line());
    let _ = writeln!(out, "  decision: {}", c.decision);
    for issue in &c.issues {
        let _ = writeln!(out, "  WARNING: certificate unsound: {}", issue.describe());
    }

    if let Some(g) = &r.ground_truth {
        let _ = writeln!(out, "ground truth");
        let _ = writeln!(
            out,
            "  |H| = {} ({})",
            g.true_order,
            if g.order_matches {
                "matches claim"
            } else {
                "DOES NOT match claim"
            }
        );
        let _ = writeln!(
            out,
            "  target {} the subgroup; decision {}",
            if g.target_member {
                "is in"
            } else {
                "is not in"
            },
            if g.decision_agrees {
                "agrees"
            } else {
                "disagrees"
            }
        );
    }

    let t = &r.timings;
    let _ = writeln!(
        out,
        "timings        validate {:.1?}, sampler {:.1?}, analytic {:.1?}, brute {:.1?}, certificate {:.1?}",
        t.validation, t.sampler, t.analytic, t.brute, t.certificate
    );
    let _ = writeln!(
        out,
        "outcome        {}",
        match r.outcome {
            Outcome::Decided => "decided",
            Outcome::InvalidCertificate => "invalid certificate",
            Outcome::Contradiction => "contradiction",
        }
    );
    out
}
