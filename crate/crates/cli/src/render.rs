//! Text and machine renderings of a verification report.

use serde::Serialize;

use crate::verify::VerificationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Serialize)]
struct Record<'a> {
    suite: &'a str,
    #[serde(rename = "identity-id")]
    identity_id: &'a str,
    status: &'a str,
    counterexample: Option<&'a str>,
}

/// One JSON object per line and per identity. Timing is left out so that the
/// output only depends on the instance and the seed.
pub fn machine(r: &VerificationReport) -> String {
    let mut out = String::new();
    for c in &r.checks {
        let rec = Record {
            suite: &c.suite,
            identity_id: &c.id,
            status: if c.passed() { "pass" } else { "fail" },
            counterexample: c.counterexample.as_deref(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("plain record"));
        out.push('\n');
    }
    out
}

pub fn text(r: &VerificationReport) -> String {
    let mut out = format!("instance {} over F_{}, seed {}\n", r.instance, r.prime, r.seed);
    for s in &r.suites {
        let verdict = if s.passed { "pass" } else { "FAIL" };
        out.push_str(&format!(
            "  {:<11} {verdict}  {:>3} identities  {:>9.2} ms\n",
            s.suite.name(),
            s.identities,
            s.millis
        ));
        for c in r.checks.iter().filter(|c| c.suite == s.suite.name() && !c.passed()) {
            out.push_str(&format!("      {}: {}\n", c.id, c.counterexample.as_deref().unwrap_or("")));
        }
    }
    if !r.dimensions.is_empty() {
        out.push_str("dimensions\n");
        for (k, v) in &r.dimensions {
            out.push_str(&format!("  {k:<40} {v}\n"));
        }
    }
    for n in &r.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    let failed = r.failures().count();
    out.push_str(&if failed == 0 {
        format!("all {} identities hold\n", r.checks.len())
    } else {
        format!("{failed} of {} identities fail\n", r.checks.len())
    });
    out
}
