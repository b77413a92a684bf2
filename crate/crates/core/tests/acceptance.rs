//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use derlab::dersolve::{
    derivation_defect, inner_map, jordan_nullspace, leibniz_nullspace, LinearMapOnAlgebra,
};
use derlab::localtools::{
    generalized_derivation_defect, local_derivation_certify, local_probes, LocalProbe,
    LocalVerdict, ProbeLabel,
};
use derlab::opalg::structure_constants;
use derlab::sample::Sampler;
use derlab::twolocal::{t2_negative_control, upper_triangular_algebra, TwoLocalVerdict};
use derlab::verify::{
    center_residual, chain_defect_worst, corrupted_table_residual, idempotent_residuals,
    implementer_center_residual, nullspace_alinearity, phi_trace_gap, phi_zero_sum_defect,
    round_trip_defect, semiprime_minimum, separating_minimum, theta_identity_residual,
    twolocal_tables,
};
use derlab::{Error, ModuleSpec, Result};

const SEED: u64 = 20240611;
const CONFIGS: [&[usize]; 4] = [&[2], &[3], &[2, 3], &[2, 2, 2]];

fn spec(f: &[usize]) -> ModuleSpec {
    ModuleSpec::new(f.to_vec()).unwrap()
}

fn rng(name: &str) -> Sampler {
    Sampler::new(SEED, name)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn c1() -> Result<Outcome> {
    let v = theta_identity_residual(&spec(&[2, 3]), 100, &mut rng("c1"))?;
    outcome(v <= 1e-12, format!("max residual {v:.2e} (<= 1e-12)"))
}

fn c2() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in [&[2][..], &[2, 3], &[2, 2, 2]] {
        let s = spec(f);
        let (dim, res) = center_residual(&s, 1, 0, &mut rng("c2"))?;
        ok &= dim == s.k() && res <= 1e-9;
        parts.push(format!("{f:?}: dim {dim}/{} res {res:.1e}", s.k()));
    }
    outcome(ok, parts.join("; "))
}

fn c3() -> Result<Outcome> {
    let v = semiprime_minimum(&spec(&[2, 3]), 100, &mut rng("c3"))?;
    outcome(v > 1e-8, format!("min |ABA| {v:.3e} (> 1e-8)"))
}

fn c4() -> Result<Outcome> {
    let expected = [3, 8, 11, 9];
    let mut ok = true;
    let mut parts = Vec::new();
    for (f, e) in CONFIGS.iter().zip(expected) {
        let ns = leibniz_nullspace(&structure_constants(&spec(f)), 1e-9)?;
        ok &= ns.dim() == e && ns.gap_ratio >= 1e6;
        parts.push(format!("{f:?} -> {} (gap {:.1e})", ns.dim(), ns.gap_ratio));
    }
    outcome(ok, parts.join("; "))
}

fn c5() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for f in CONFIGS {
        let s = spec(f);
        let ns = leibniz_nullspace(&structure_constants(&s), 1e-9)?;
        for m in [1, 2] {
            worst = worst.max(round_trip_defect(&s, &ns.basis, m)?);
            worst = worst.max(implementer_center_residual(&s, m, 10, &mut rng("c5"))?);
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max defect {worst:.2e} (<= 1e-9), frames 1 and 2"),
    )
}

fn c6() -> Result<Outcome> {
    let (mut lin, mut cen) = (0.0f64, 0.0f64);
    for f in CONFIGS {
        let s = spec(f);
        let ns = leibniz_nullspace(&structure_constants(&s), 1e-9)?;
        let (l, c) = nullspace_alinearity(&s, &ns.basis, 20, &mut rng("c6"))?;
        lin = lin.max(l);
        cen = cen.max(c);
    }
    outcome(
        lin <= 1e-9 && cen <= 1e-9,
        format!("A-linearity {lin:.2e}, |d(T_a)| {cen:.2e} (<= 1e-9)"),
    )
}

fn c7() -> Result<Outcome> {
    let s = spec(&[2, 3]);
    let zero = phi_zero_sum_defect(&s, 100, &mut rng("c7-zero"))?;
    let gap = phi_trace_gap(&s, 100, &mut rng("c7-trace"))?;
    outcome(
        zero <= 1e-9 && gap <= 1e-12,
        format!("zero sums {zero:.2e} (<= 1e-9), trace gap {gap:.2e} (<= 1e-12)"),
    )
}

fn c8() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in CONFIGS {
        let alg = structure_constants(&spec(f));
        let (l, j) = (
            leibniz_nullspace(&alg, 1e-9)?.dim(),
            jordan_nullspace(&alg, 1e-9)?.dim(),
        );
        ok &= l == j;
        parts.push(format!("{f:?}: {j} = {l}"));
    }
    outcome(ok, parts.join("; "))
}

fn c9() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in [&[2][..], &[2, 3]] {
        let s = spec(f);
        let alg = structure_constants(&s);
        let ns = leibniz_nullspace(&alg, 1e-9)?;
        let (res, cons, consistent) = twolocal_tables(&s, &ns.basis, 2, &mut rng("c9"))?;
        let mut r = rng("c9-corrupt");
        let d = inner_map(&alg, &r.vector(alg.dim()));
        let (bad, verdict) = corrupted_table_residual(&s, &d, &mut r)?;
        ok &= consistent
            && res <= 1e-9
            && cons <= 1e-9
            && verdict == TwoLocalVerdict::Rejected
            && bad >= 0.1;
        parts.push(format!(
            "{f:?}: pairs {res:.1e}, consequences {cons:.1e}, corruption {bad:.2}"
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c10() -> Result<Outcome> {
    let s = spec(&[2, 3]);
    let (idem, rec) = idempotent_residuals(&s, 100, &mut rng("c10"))?;
    let sep = separating_minimum(&s, 100, &mut rng("c10-sep"))?;
    outcome(
        idem <= 1e-12 && rec <= 1e-10 && sep > 1e-8,
        format!("idempotency {idem:.2e} (<= 1e-12), reconstruction {rec:.2e} (<= 1e-10), min witness {sep:.2e}"),
    )
}

fn c11() -> Result<Outcome> {
    let s = spec(&[2, 3]);
    let ns = leibniz_nullspace(&structure_constants(&s), 1e-9)?;
    let v = chain_defect_worst(&s, &ns.basis, 50, SEED, &mut rng("c11"))?;
    outcome(v <= 1e-10, format!("max chain defect {v:.2e} (<= 1e-10)"))
}

fn c12() -> Result<Outcome> {
    let s = spec(&[2, 3]);
    let alg = structure_constants(&s);
    let mut r = rng("c12");
    let scalars: Vec<_> = (0..20).map(|_| r.algebra_element(s.space())).collect();
    let probes = local_probes(&s, 20, SEED);
    let d = inner_map(&alg, &r.vector(alg.dim()));
    let inner = local_derivation_certify(&s, &d, &probes, &scalars, 1e-10)?;
    let inner_ok = inner.verdict == LocalVerdict::Derivation
        && inner.max_residual() <= 1e-10
        && inner.derivation_defect <= 1e-9;

    let g = d.add(&LinearMapOnAlgebra::new(
        alg.left_matrix(&r.vector(alg.dim())),
    )?);
    let unit = [LocalProbe {
        label: ProbeLabel::Named("unit".into()),
        coords: alg.unit_coords().clone(),
    }];
    let at_unit = local_derivation_certify(&s, &g, &unit, &scalars, 1e-10)?.residuals[0].residual;
    let du = g.apply(alg.unit_coords()).norm();
    let unit_ok = at_unit > 1e-10 && (at_unit - du).abs() <= 1e-9 * du;

    let tr = derlab::dersolve::blockwise_transpose(&s);
    let t =
        local_derivation_certify(&s, &tr, &probes[..alg.dim()], &scalars, 1e-10)?.max_residual();
    outcome(
        inner_ok && unit_ok && t >= 0.1,
        format!(
            "inner max residual {:.1e}, defect {:.1e}; unit residual {at_unit:.4} vs |delta(1)| {du:.4}; transpose {t:.3} (>= 0.1)",
            inner.max_residual(),
            inner.derivation_defect
        ),
    )
}

fn c13() -> Result<Outcome> {
    let s = spec(&[2, 3]);
    let alg = structure_constants(&s);
    let mut r = rng("c13");
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let d = inner_map(&alg, &r.vector(alg.dim()));
        let m = r.vector(alg.dim());
        for side in [alg.left_matrix(&m), alg.right_matrix(&m)] {
            worst = worst.max(generalized_derivation_defect(
                &alg,
                &d.add(&LinearMapOnAlgebra::new(side)?),
            ));
        }
    }
    let d = inner_map(&alg, &r.vector(alg.dim()));
    let unital = generalized_derivation_defect(&alg, &d).max(derivation_defect(&alg, &d));
    outcome(
        worst <= 1e-10 && unital <= 1e-10,
        format!("one-sided perturbations {worst:.2e}, unital case {unital:.2e} (<= 1e-10)"),
    )
}

fn c14() -> Result<Outcome> {
    let dim = leibniz_nullspace(&upper_triangular_algebra(), 1e-9)?.dim();
    let search = match t2_negative_control(1e-9, SEED, 200) {
        Ok(ctl) => {
            let ok = ctl.report.verdict == TwoLocalVerdict::ConsistentWith2Local
                && ctl.consequences.additivity >= 0.1;
            (
                ok,
                format!(
                    "found after {} candidates, additivity defect {:.3}",
                    ctl.attempts, ctl.consequences.additivity
                ),
            )
        }
        Err(Error::SearchBudgetExceeded { budget }) => {
            (true, format!("search budget {budget} exceeded"))
        }
        Err(e) => (false, e.to_string()),
    };
    outcome(
        dim == 2 && search.0,
        format!("derivation dimension {dim} (= 2); {}", search.1),
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("rank-one operator identities", c1),
        ("center of the operator algebra", c2),
        ("semiprime witnesses", c3),
        ("derivation dimension law", c4),
        ("inner implementer round trip", c5),
        ("A-linearity of derivations", c6),
        ("trace functional well defined", c7),
        ("Jordan and Leibniz dimensions agree", c8),
        ("2-local tables and corruption", c9),
        ("idempotents and separating witnesses", c10),
        ("zero-product bilinear identities", c11),
        ("local derivation certification", c12),
        ("generalized derivations", c13),
        ("upper-triangular negative control", c14),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error [{}]: {e}", e.kind())),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{} of {} criteria passed in {secs:.1} s (target < 60 s)",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
