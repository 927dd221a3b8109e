//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nclp_harness::config::{Overrides, Span};
use nclp_harness::{run, Algebra, Experiment, ExperimentConfig, KernelChoice, Report};

struct Run {
    label: String,
    report: Report,
    elapsed: Duration,
}

fn execute(experiment: Experiment, overrides: Overrides) -> Run {
    let cfg = ExperimentConfig::resolve(experiment, &overrides).expect("valid configuration");
    let label = format!("{} {}", experiment, cfg.algebra);
    let start = Instant::now();
    let report = run(&cfg).unwrap_or_else(|e| panic!("{label} failed to run: {e}"));
    Run { label, report, elapsed: start.elapsed() }
}

fn algebra(s: &str) -> Option<Algebra> {
    Some(s.parse().expect("valid algebra"))
}

#[derive(Default)]
struct Criterion {
    lines: Vec<String>,
    pass: bool,
}

impl Criterion {
    fn new() -> Self {
        Criterion { lines: Vec::new(), pass: true }
    }

    fn assert(&mut self, run: &Run, names: &[&str]) -> &mut Self {
        for name in names {
            match run.report.assertion(name) {
                Some(a) => {
                    self.pass &= a.pass;
                    self.lines.push(format!("{} {name}: {:.3e} <= {:.1e}", run.label, a.measured, a.threshold));
                }
                None => {
                    self.pass = false;
                    self.lines.push(format!("{} {name}: missing", run.label));
                }
            }
        }
        self
    }

    /// Raw maxima, reported but not asserted.
    fn report(&mut self, run: &Run, metrics: &[&str]) -> &mut Self {
        for m in metrics {
            if let Some(a) = run.report.aggregate.get(*m) {
                self.lines.push(format!("{} max {m} = {:.4}", run.label, a.max));
            }
        }
        self
    }

    fn within(&mut self, runs: &[&Run], budget: Duration) -> &mut Self {
        let total: Duration = runs.iter().map(|r| r.elapsed).sum();
        self.pass &= total < budget;
        self.lines.push(format!("runtime {:.1}s < {}s", total.as_secs_f64(), budget.as_secs()));
        self
    }

    fn print(&self, n: usize, title: &str) -> bool {
        println!("{} criterion {n}: {title}", if self.pass { "PASS" } else { "FAIL" });
        for l in &self.lines {
            println!("    {l}");
        }
        self.pass
    }
}

fn main() -> ExitCode {
    let tensor = || Overrides { algebra: algebra("tensor:4"), ..Default::default() };
    let grid = || Overrides { algebra: algebra("grid:1,4,2"), ..Default::default() };
    let lambda = Some(Span(-2, 4));

    let cuc = [
        execute(Experiment::Cuculescu, Overrides { trials: Some(100), lambda_exp: lambda, ..tensor() }),
        execute(Experiment::Cuculescu, Overrides { trials: Some(100), lambda_exp: lambda, ..grid() }),
    ];
    let gundy = [
        execute(Experiment::Gundy, Overrides { trials: Some(100), ..tensor() }),
        execute(Experiment::Gundy, Overrides { trials: Some(100), ..grid() }),
    ];
    let cz = execute(Experiment::Cz, Overrides { trials: Some(100), lambda_exp: lambda, ..Default::default() });
    let zeta = execute(Experiment::Zeta, Overrides { trials: Some(100), lambda_exp: lambda, ..Default::default() });
    let l2 = [execute(Experiment::TransformL2, tensor()), execute(Experiment::TransformL2, grid())];
    let norms = [execute(Experiment::Norms, tensor()), execute(Experiment::Norms, grid())];
    let weak = [execute(Experiment::TransformWeak11, tensor()), execute(Experiment::TransformWeak11, grid())];
    let ksk: Vec<Run> = (6..=8)
        .map(|k| execute(Experiment::Ksk, Overrides { algebra: algebra(&format!("grid:1,{k},1")), ..Default::default() }))
        .collect();
    let decay = execute(
        Experiment::PseudolocDecay,
        Overrides {
            algebra: algebra("grid:1,10,1"),
            s: Some(Span(3, 8)),
            kernel: Some(KernelChoice::LpBumps),
            gamma: Some(1.0),
            ..Default::default()
        },
    );
    let para = execute(Experiment::Paraproduct, Overrides::default());
    let vanish = execute(Experiment::Vanish, Overrides::default());
    let nc = [
        execute(Experiment::NcPseudoloc, Overrides { algebra: algebra("grid:1,6,2"), s: Some(Span(2, 4)), ..Default::default() }),
        execute(Experiment::NcPseudoloc, Overrides { algebra: algebra("grid:1,8,2"), s: Some(Span(2, 5)), ..Default::default() }),
    ];
    let ergodic = execute(Experiment::Ergodic, Overrides::default());
    let annuli = execute(Experiment::BmoCzo, Overrides { kernel: Some(KernelChoice::Annuli), ..Default::default() });

    let mut ok = true;
    let mut c = Criterion::new();
    for r in &cuc {
        c.assert(r, &["cuculescu-weak-type-constant-1"]);
    }
    ok &= c.within(&[&cuc[0], &cuc[1]], Duration::from_secs(60)).print(1, "Cuculescu weak type with constant 1");

    let mut c = Criterion::new();
    for r in &cuc {
        c.assert(r, &["cuculescu-commutation", "cuculescu-domination"]);
    }
    ok &= c.print(2, "Cuculescu commutation and domination");

    let mut c = Criterion::new();
    for r in &gundy {
        c.assert(
            r,
            &["gundy-reconstruction", "gundy-parts-are-martingales", "gundy-gamma-annihilated", "gundy-gamma-killed-by-truncation"],
        );
    }
    ok &= c.print(3, "Gundy decomposition identities");

    let mut c = Criterion::new();
    for r in &gundy {
        c.assert(r, &["gundy-alpha-envelope", "gundy-beta-envelope", "gundy-gamma-envelope", "gundy-gamma-cuculescu"])
            .report(r, &["alpha_ratio", "beta_ratio", "gamma_ratio"]);
    }
    ok &= c.print(4, "Gundy estimates within the envelope");

    ok &= Criterion::new()
        .assert(&cz, &["cz-good-diagonal-2^n-lambda", "cz-bad-diagonal-constant-2", "cz-reconstruction"])
        .assert(&cz, &["cz-bad-mean-zero", "cz-disjoint-projections", "cz-projections"])
        .print(5, "Calderón–Zygmund decomposition constants");

    ok &= Criterion::new()
        .assert(&zeta, &["zeta-weak-type-9^n", "zeta-below-xi-on-9Q", "zeta-below-each-level"])
        .print(6, "zeta projection estimates");

    let mut c = Criterion::new();
    for r in &l2 {
        c.assert(r, &["l2-identity-unit-rows", "l2-identity-weighted"]);
    }
    ok &= c.print(7, "L2 transform identities");

    let mut c = Criterion::new();
    for r in &norms {
        c.assert(r, &["triangular-truncation-contraction", "row-column-pythagoras"]);
    }
    ok &= c.print(8, "triangular truncation");

    let mut c = Criterion::new();
    for r in &weak {
        c.assert(r, &["weak11-row-envelope", "weak11-column-envelope"]).report(r, &["row_ratio", "col_ratio"]);
    }
    ok &= c.print(9, "weak (1,1) envelope of martingale transforms");

    let mut c = Criterion::new();
    for r in &ksk {
        c.assert(r, &["ksk-oracle"]);
        let pairs = r.report.trials.len() * 200;
        c.pass &= pairs >= 200;
        c.lines.push(format!("{} sampled pairs: {pairs}", r.label));
    }
    ok &= c.print(10, "dyadic kernel oracle equivalence");

    ok &= Criterion::new()
        .assert(&decay, &["phi-slope-at-most", "phi-slope-at-least", "psi-slope-at-most", "psi-slope-at-least"])
        .assert(&decay, &["pseudoloc-ratio-envelope"])
        .report(&decay, &["phi_norm_s3", "phi_norm_s8", "psi_norm_s3", "psi_norm_s8"])
        .within(&[&decay], Duration::from_secs(300))
        .print(11, "pseudo-localization decay rate");

    ok &= Criterion::new()
        .assert(&para, &["paraproduct-bmo-bound"])
        .assert(&vanish, &["paraproduct-vanishes-off-sigma"])
        .print(12, "paraproduct bound and vanishing");

    let mut c = Criterion::new();
    for r in &ksk {
        c.assert(
            r,
            &[
                "schur-dominates-phi",
                "cotlar-dominates-phi",
                "schur-dominates-lambda",
                "schur-dominates-psi",
                "schur-integral-s1-envelope",
                "schur-integral-s2-envelope",
            ],
        );
    }
    ok &= c.print(13, "Schur and Cotlar domination");

    let mut c = Criterion::new();
    for r in &nc {
        c.assert(r, &["nc-pseudoloc-envelope", "nc-scalar-reduction"]).report(r, &["nc_ratio", "layers_tested"]);
    }
    ok &= c.print(14, "noncommutative pseudo-localization");

    ok &= Criterion::new()
        .assert(&ergodic, &["ergodic-rows-below-one", "ergodic-truncated-rows-below-one", "ergodic-l2-weighted-identity"])
        .assert(&ergodic, &["ergodic-weak11-row-envelope", "ergodic-weak11-column-envelope"])
        .print(15, "ergodic coefficients");

    ok &= Criterion::new()
        .assert(&annuli, &["annuli-energy-identity", "linf-to-bmo-envelope"])
        .report(&annuli, &["bmo_over_linf"])
        .print(16, "annuli family");

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
