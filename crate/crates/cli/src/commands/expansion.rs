use std::fs::File;
use std::path::Path;

use serde::Serialize;

use tfe_core::hodograph::{to_hodograph, transport_expansion, PhysicalProfile, Series, TransportedExpansion};
use tfe_core::loggrid::{extract_expansion_with, ExpansionFit, LogGrid};

use crate::output::{Failure, Outcome, Sink};

#[derive(Serialize)]
struct Interval {
    exponent: f64,
    label: String,
    coefficient: f64,
    /// coefficient ± 1.96 standard errors
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct ExpansionReport {
    profile_samples: usize,
    z0: f64,
    grid: LogGrid,
    fit: ExpansionFit,
    confidence: Vec<Interval>,
    transported: TransportedExpansion,
    contact_speed: f64,
}

fn table(sink: &Sink, title: &str, s: &Series) {
    sink.say(title);
    for (e, c) in s.terms() {
        sink.say(format!("  x^{:<10} {:+.6e}", e.to_string(), c));
    }
}

pub fn run(sink: &Sink, path: &Path) -> Outcome {
    let cfg = &sink.cfg;
    let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let profile = PhysicalProfile::read_csv(file).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    // the hodograph grid is the configured one, clipped to the profile's support
    let sig = |h: f64| h.ln() / 1.5;
    let lo = cfg.grid.s_min.max(sig(profile.h[0]));
    let hi = cfg.grid.s_max.min(sig(profile.h[profile.len() - 1]));
    let grid = LogGrid::new(lo, hi, cfg.grid.count)
        .map_err(|e| Failure::Usage(format!("profile support and grid do not overlap: {e}")))?;
    let u = to_hodograph(&profile, grid)?;
    let fit = extract_expansion_with(&u, cfg.n0, &cfg.fit())?;
    let transported = transport_expansion(&fit, cfg.n0)?;
    let confidence = fit
        .terms
        .iter()
        .map(|t| Interval {
            exponent: t.exponent.value(),
            label: t.exponent.to_string(),
            coefficient: t.coefficient,
            lo: t.coefficient - 1.96 * t.std_error,
            hi: t.coefficient + 1.96 * t.std_error,
        })
        .collect();

    sink.say(format!("{} samples, Z0 = {}, hodograph grid s in [{lo:.3}, {hi:.3}]", profile.len(), profile.z0));
    sink.say(format!("fit of u (condition number {:.2e}):", fit.condition_number));
    for t in &fit.terms {
        sink.say(format!("  x^{:<10} {:+.6e} +- {:.2e}", t.exponent.to_string(), t.coefficient, 1.96 * t.std_error));
    }
    table(sink, "h = x~^{3/2}(1 + sum u~_i x~^i):", &transported.h_tilde);
    table(sink, "x = (1+u0) x~ (1 + sum c_i x~^i):", &transported.inverse);
    table(sink, "V(t, z) = sum V~_i x~^i:", &transported.velocity_tilde);
    let contact_speed = transported.contact_speed();
    sink.say(format!("contact-line speed V0 = {contact_speed:.9}"));

    sink.report(
        "expansion",
        &ExpansionReport {
            profile_samples: profile.len(),
            z0: profile.z0,
            grid,
            fit,
            confidence,
            transported,
            contact_speed,
        },
    )
}
