//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Every tolerance is pinned here; the tests fail loudly rather than adapt.

use std::time::Instant;

use expsys_core::convexfun::{build_smoothing, ConvexDecreasingFunction};
use expsys_core::criteria::{
    classify_weight, evaluate_b1, evaluate_b2, evaluate_b3, evaluate_ng, evaluate_t1_i,
    evaluate_t1_ii1, evaluate_t1_ii2, geometric_points, ClassifyProbe, CriterionReport,
    OuterRadiusRule, SweepGrid, Verdict,
};
use expsys_core::distributions::PointDistribution;
use expsys_core::geometry::{
    arc_length_measure, convex_hull, perimeter, ConvexBody, PlanePoint,
};
use expsys_core::quad::regression_slope;
use expsys_core::riesz::{
    mass_inequality_check, inequality_suite_cases, run_inequality_suite, growth_deficit, TestEntireFunction,
    VstarMode,
};
use expsys_core::subharmonic::{polar_laplacian_fd, RadialSubharmonic};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn conclude(number: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {number} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {number} ({name}) failed: {detail}");
}

fn vertical_segment(sigma: f64) -> ConvexBody {
    ConvexBody::segment(PlanePoint::new(0.0, -sigma), PlanePoint::new(0.0, sigma)).unwrap()
}

/// 1. Growth-deficit boundedness at the equality case: sine-type zeros
///    against the perimeter-4 segment with the unit weight. The deficit
///    table over r in {2,4,8} and geometric R up to 1e4 stays in a band of
///    width <= 1.0 with |slope vs ln R| <= 0.01 * (2/pi). Runtime <= 10 s.
#[test]
fn acceptance_1_deficit_boundedness() {
    let start = Instant::now();
    let g = TestEntireFunction::sine_type(1.0);
    let body = vertical_segment(1.0);
    let f = ConvexDecreasingFunction::constant(1.0).unwrap();

    let r_list = [2.0, 4.0, 8.0];
    let big_rs = geometric_points(50.0, 1e4, 48);
    let mut table_min = f64::INFINITY;
    let mut table_max = f64::NEG_INFINITY;
    let mut worst_slope: f64 = 0.0;
    for &r in &r_list {
        let mut lns = Vec::new();
        let mut ds = Vec::new();
        for &big_r in &big_rs {
            let d = growth_deficit(&g, &body, &f, r, big_r).unwrap();
            table_min = table_min.min(d);
            table_max = table_max.max(d);
            lns.push(big_r.ln());
            ds.push(d);
        }
        let slope = regression_slope(&lns, &ds);
        if slope.abs() > worst_slope.abs() {
            worst_slope = slope;
        }
    }
    let band = table_max - table_min;
    let slope_bound = 0.01 * (2.0 / std::f64::consts::PI);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = band <= 1.0 && worst_slope.abs() <= slope_bound && elapsed <= 10.0;
    conclude(
        1,
        "deficit boundedness at equality",
        pass,
        &format!(
            "band {band:.4} (<= 1.0), worst |slope| {:.5} (<= {slope_bound:.5}), {elapsed:.2} s (<= 10 s)",
            worst_slope.abs()
        ),
    );
}

/// 2. Annulus-inequality suite: 20 seeded cases with 4096 circle samples;
///    slack >= -(quadrature error estimate) in every case, and doubling the
///    samples shrinks any negative slack. Runtime <= 60 s.
#[test]
fn acceptance_2_annulus_inequality_suite() {
    let start = Instant::now();
    let cases = inequality_suite_cases(0x1CABB0, 20);
    let reports = run_inequality_suite(&cases, 4096, VstarMode::Normal);

    let mut all_ok = true;
    let mut detail = String::new();
    let mut negative = Vec::new();
    for (i, (case, report)) in cases.iter().zip(&reports).enumerate() {
        match report {
            Ok(rep) => {
                if rep.slack < -rep.quadrature_error_estimate {
                    all_ok = false;
                    detail = format!(
                        "{} slack {} below -{}",
                        case.label, rep.slack, rep.quadrature_error_estimate
                    );
                }
                if rep.slack < 0.0 {
                    negative.push((i, rep.slack));
                }
            }
            Err(e) => {
                all_ok = false;
                detail = format!("{} errored: {e}", case.label);
            }
        }
    }
    // Where the slack came out negative (within quadrature error), doubling
    // the circle samples must shrink its magnitude.
    for &(i, coarse_slack) in &negative {
        let case = &cases[i];
        let h = RadialSubharmonic::from_weight(&case.f, case.inner_r, case.outer_r).unwrap();
        let fine = mass_inequality_check(&case.g, &case.body, &h, 8192).unwrap();
        if fine.slack < coarse_slack {
            all_ok = false;
            detail = format!(
                "{}: refining samples did not shrink negative slack ({} -> {})",
                case.label, coarse_slack, fine.slack
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = all_ok && elapsed <= 60.0;
    if detail.is_empty() {
        detail = format!(
            "20 cases clean, {} with negative slack, {elapsed:.2} s (<= 60 s)",
            negative.len()
        );
    }
    conclude(2, "annulus inequality suite", pass, &detail);
}

/// 3. Laplacian identity: closed form vs 5-point polar finite differences
///    to 1e-6 relative for the constant, x^-1 and x^-1/2 weights on 1e3
///    annulus points; the x^-1 closed form equals 9 rho^-5 to 1e-10.
#[test]
fn acceptance_3_laplacian_identity() {
    let weights = [
        ConvexDecreasingFunction::constant(1.0).unwrap(),
        ConvexDecreasingFunction::power(1.0).unwrap(),
        ConvexDecreasingFunction::power(0.5).unwrap(),
    ];
    let mut worst_rel: f64 = 0.0;
    for f in &weights {
        let h = RadialSubharmonic::from_weight(f, 1.0, 16.0).unwrap();
        for k in 0..1000 {
            let rho = 1.2 + (12.0 - 1.2) * k as f64 / 999.0;
            let closed = h.laplacian_closed_form(rho).unwrap();
            let fd = polar_laplacian_fd(|x| h.v_eval(x).unwrap(), rho, 1e-4);
            let rel = (fd - closed).abs() / closed.abs().max(1e-300);
            worst_rel = worst_rel.max(rel);
        }
    }
    let reciprocal = ConvexDecreasingFunction::power(1.0).unwrap();
    let h = RadialSubharmonic::from_weight(&reciprocal, 1.0, 16.0).unwrap();
    let mut worst_exact: f64 = 0.0;
    for k in 0..1000 {
        let rho = 1.2 + (12.0 - 1.2) * k as f64 / 999.0;
        let closed = h.laplacian_closed_form(rho).unwrap();
        let expected = 9.0 * rho.powi(-5);
        worst_exact = worst_exact.max((closed - expected).abs() / expected);
    }
    let pass = worst_rel <= 1e-6 && worst_exact <= 1e-10;
    conclude(
        3,
        "Laplacian closed form vs finite differences",
        pass,
        &format!("worst FD rel err {worst_rel:.2e} (<= 1e-6), worst 9/rho^5 rel err {worst_exact:.2e} (<= 1e-10)"),
    );
}

fn random_convex_table(seed: u64) -> ConvexDecreasingFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let knot_count = 6 + (rng.gen::<u32>() % 5) as usize;
    let mut xs: Vec<f64> = (0..knot_count)
        .map(|_| 1.0 + 59.0 * rng.gen::<f64>())
        .collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    // Convexity: slopes increase toward zero.
    let mut slopes: Vec<f64> = (0..xs.len() - 1)
        .map(|_| -1.2 * rng.gen::<f64>() - 0.01)
        .collect();
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut values = vec![0.0; xs.len()];
    // Walk backward from a positive tail value so everything stays positive.
    values[xs.len() - 1] = 0.5 + rng.gen::<f64>();
    for i in (0..xs.len() - 1).rev() {
        values[i] = values[i + 1] - slopes[i] * (xs[i + 1] - xs[i]);
    }
    let knots: Vec<(f64, f64)> = xs.into_iter().zip(values).collect();
    ConvexDecreasingFunction::piecewise_linear(knots).unwrap()
}

/// 4. Smoothing stages n = 1..8 for the reciprocal log, the depth-2
///    iterated log and a random convex table: sup gap <= 1/n on 1e4
///    samples, stages decrease, curvature >= -1e-12, and the shifted
///    derivative inequality holds at 1e3 points. Runtime <= 5 s.
#[test]
fn acceptance_4_smoothing_construction() {
    let start = Instant::now();
    let weights = [
        ConvexDecreasingFunction::reciprocal_log(1).unwrap(),
        ConvexDecreasingFunction::reciprocal_log(2).unwrap(),
        random_convex_table(0xC0FFEE),
    ];
    let n_max = 8u32;
    let mut pass = true;
    let mut detail = String::new();

    'outer: for f in &weights {
        let seq = build_smoothing(f, n_max).unwrap();
        for n in 1..=n_max {
            let stage = seq.stage(n);
            let (lo, hi) = stage.range();
            // sup |f_n - f| <= 1/n on 1e4 samples, f_n >= f, curvature >= 0.
            let mut sup_gap: f64 = 0.0;
            for k in 0..10_000 {
                let x = lo + (hi - lo) * k as f64 / 9_999.0;
                let fnv = stage.eval(x).unwrap();
                let fv = f.eval(x);
                let gap = fnv - fv;
                if gap < -1e-12 {
                    pass = false;
                    detail = format!("{}: stage {n} dips below the base at x={x}", f.describe());
                    break 'outer;
                }
                sup_gap = sup_gap.max(gap);
                if stage.second_derivative(x).unwrap() < -1e-12 {
                    pass = false;
                    detail = format!("{}: stage {n} curvature negative at x={x}", f.describe());
                    break 'outer;
                }
                if n < n_max {
                    let next = seq.stage(n + 1).eval(x).unwrap();
                    if next > fnv + 1e-12 {
                        pass = false;
                        detail =
                            format!("{}: stage {} above stage {n} at x={x}", f.describe(), n + 1);
                        break 'outer;
                    }
                }
            }
            if sup_gap > 1.0 / n as f64 {
                pass = false;
                detail = format!(
                    "{}: stage {n} sup gap {sup_gap} exceeds 1/{n}",
                    f.describe()
                );
                break 'outer;
            }
            // Shifted derivative inequality at 1e3 points.
            let shift = 1.0 / n as f64;
            for k in 0..1000 {
                let x = (lo + shift) + (hi - lo - shift) * k as f64 / 999.0;
                let (_, right) = f.one_sided_derivatives(x.max(f.r0() * (1.0 + 1e-12))).unwrap();
                let shifted = stage.derivative(x - shift).unwrap();
                if !(right >= shifted - 1e-10 && right <= 1e-12) {
                    pass = false;
                    detail = format!(
                        "{}: stage {n} derivative shift fails at x={x}: f'+ {right} vs f_n' {shifted}",
                        f.describe()
                    );
                    break 'outer;
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass = pass && elapsed <= 5.0;
    if detail.is_empty() {
        detail = format!("3 weights x 8 stages clean, {elapsed:.2} s (<= 5 s)");
    }
    conclude(4, "smoothing construction", pass, &detail);
}

fn max_cell_gap(a: &CriterionReport, b: &CriterionReport) -> f64 {
    assert_eq!(a.values.len(), b.values.len());
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x.value - y.value).abs())
        .fold(0.0, f64::max)
}

/// 5. Reduction identities: the p = 0 averaged condition equals the plain
///    one and the unit-weight ratio condition equals the a-averaged one to
///    1e-10 cell by cell; p = 100 approaches the plain condition within 1%.
#[test]
fn acceptance_5_reduction_identities() {
    let z = PointDistribution::sine_lattice(std::f64::consts::PI, 10_000);
    let body = vertical_segment(std::f64::consts::PI);
    let grid = SweepGrid::geometric(10.0, 7000.0, 25, 2.0, 64.0, 6).unwrap();

    let ng = evaluate_ng(&z, &body, &grid).unwrap();
    let b1 = evaluate_b1(&z, &body, 0.0, &grid).unwrap();
    let gap_b1 = max_cell_gap(&ng, &b1);

    let ratio_grid = SweepGrid::geometric(10.0, 900.0, 12, 2.0, 8.0, 5).unwrap();
    let b2 = evaluate_b2(&z, &body, &ratio_grid).unwrap();
    let one = ConvexDecreasingFunction::constant(1.0).unwrap();
    let ii2 = evaluate_t1_ii2(&z, &one, perimeter(&body), &ratio_grid).unwrap();
    let gap_ii2 = max_cell_gap(&b2, &ii2);

    let b3 = evaluate_b3(&z, &body, 100.0, &grid).unwrap();
    let rel_b3 = (b3.estimate - ng.estimate).abs() / ng.estimate;

    let pass = gap_b1 <= 1e-10 && gap_ii2 <= 1e-10 && rel_b3 <= 0.01;
    conclude(
        5,
        "reduction identities",
        pass,
        &format!(
            "p=0 gap {gap_b1:.2e} (<= 1e-10), unit-weight ratio gap {gap_ii2:.2e} (<= 1e-10), p=100 rel {rel_b3:.4} (<= 0.01)"
        ),
    );
}

/// 6. Weight classifier: the reciprocal log diverges in the tail sense but
///    not in the window sense, with the (r=e, a=e) window equal to
///    (1/2) ln 2 to 1e-9; the unit weight passes the window condition with
///    window value ln a to 1e-12.
#[test]
fn acceptance_6_weight_classifier() {
    let log1 = ConvexDecreasingFunction::reciprocal_log(1).unwrap();
    let class_log = classify_weight(&log1, &ClassifyProbe::default_for(&log1));
    let e = std::f64::consts::E;
    let window_log = log1.kernel_integral(e, e * e);
    let log_window_err = (window_log - 0.5 * 2.0f64.ln()).abs();

    let one = ConvexDecreasingFunction::constant(1.0).unwrap();
    let class_one = classify_weight(&one, &ClassifyProbe::default_for(&one));
    let a = 5.25;
    let window_one_err = (one.kernel_integral(17.0, a * 17.0) - a.ln()).abs();

    let pass = class_log.if_diverges == Verdict::EvidenceSatisfied
        && class_log.lni_infinite == Verdict::EvidenceViolated
        && log_window_err <= 1e-9
        && class_one.lni_infinite == Verdict::EvidenceSatisfied
        && window_one_err <= 1e-12;
    conclude(
        6,
        "weight classifier",
        pass,
        &format!(
            "log: if={} lni={} window err {log_window_err:.1e} (<= 1e-9); unit: lni={} window err {window_one_err:.1e} (<= 1e-12)",
            class_log.if_diverges.as_str(),
            class_log.lni_infinite.as_str(),
            class_one.lni_infinite.as_str()
        ),
    );
}

/// 7. Arc-length totals: 100 seeded random convex polygons have atom totals
///    equal to their perimeters to 1e-12 relative; collinear point sets
///    yield exactly two atoms summing to twice the segment length.
#[test]
fn acceptance_7_arc_length_totals() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9E0);
    let mut polygons = 0usize;
    let mut worst_rel: f64 = 0.0;
    while polygons < 100 {
        let n = 5 + (rng.gen::<u32>() % 30) as usize;
        let pts: Vec<PlanePoint> = (0..n)
            .map(|_| {
                PlanePoint::new(
                    200.0 * rng.gen::<f64>() - 100.0,
                    200.0 * rng.gen::<f64>() - 100.0,
                )
            })
            .collect();
        let hull = convex_hull(&pts).unwrap();
        if !matches!(hull, ConvexBody::Polygon(_)) {
            continue;
        }
        polygons += 1;
        let prm = perimeter(&hull);
        let total = arc_length_measure(&hull).unwrap().total_mass();
        worst_rel = worst_rel.max((total - prm).abs() / prm);
    }

    let mut segments_ok = true;
    for k in 0..20 {
        let dir = PlanePoint::from_polar(1.0, 0.31 * k as f64);
        let len = 0.5 + k as f64;
        let pts: Vec<PlanePoint> = (0..=4)
            .map(|j| {
                let t = len * j as f64 / 4.0;
                PlanePoint::new(t * dir.re, t * dir.im)
            })
            .collect();
        let hull = convex_hull(&pts).unwrap();
        let m = arc_length_measure(&hull).unwrap();
        let atom_sum: f64 = m.atoms.iter().map(|a| a.weight).sum();
        if m.atoms.len() != 2 || (atom_sum - 2.0 * len).abs() > 1e-12 * len {
            segments_ok = false;
        }
    }

    let pass = worst_rel <= 1e-12 && segments_ok;
    conclude(
        7,
        "arc-length measure totals",
        pass,
        &format!("worst polygon rel err {worst_rel:.2e} (<= 1e-12), segments two atoms twice length: {segments_ok}"),
    );
}

/// 8. Monotonicity and threshold scaling: adding 100 random points never
///    decreases any criterion functional at any grid cell, and doubling the
///    body flips the dense-lattice verdict exactly where the threshold
///    crosses the density.
#[test]
fn acceptance_8_monotonicity_and_scaling() {
    let z = PointDistribution::sine_lattice(1.0, 3000);
    let extra = PointDistribution::random_uniform(100, 2000.0, 0xADD);
    let both = z
        .union(&extra)
        .with_truncation_radius(z.truncation_radius().unwrap());
    let body = vertical_segment(1.0);
    let one = ConvexDecreasingFunction::constant(1.0).unwrap();
    let grid = SweepGrid::geometric(10.0, 900.0, 10, 2.0, 8.0, 4).unwrap();
    let t1_grid = SweepGrid::new(
        geometric_points(4.0, 100.0, 6),
        vec![2.0],
        OuterRadiusRule::List(geometric_points(8.0, 3000.0, 12)),
    )
    .unwrap();
    let p_bound = perimeter(&body);

    let run_all = |zz: &PointDistribution| -> Vec<CriterionReport> {
        vec![
            evaluate_ng(zz, &body, &grid).unwrap(),
            evaluate_b1(zz, &body, 0.5, &grid).unwrap(),
            evaluate_b2(zz, &body, &grid).unwrap(),
            evaluate_b3(zz, &body, 2.0, &grid).unwrap(),
            evaluate_t1_i(zz, &one, p_bound, &t1_grid).unwrap(),
            evaluate_t1_ii1(zz, &one, p_bound, &grid).unwrap(),
            evaluate_t1_ii2(zz, &one, p_bound, &grid).unwrap(),
        ]
    };
    let before = run_all(&z);
    let after = run_all(&both);
    let mut monotone = true;
    let mut detail = String::new();
    for (x, y) in before.iter().zip(&after) {
        assert_eq!(x.values.len(), y.values.len(), "{}", x.criterion);
        for (cx, cy) in x.values.iter().zip(&y.values) {
            if cy.value < cx.value - 1e-12 * cx.value.abs().max(1.0) {
                monotone = false;
                detail = format!(
                    "{} decreased at r={} a={:?} R={:?}: {} -> {}",
                    x.criterion, cx.r, cx.a, cx.outer_r, cx.value, cy.value
                );
            }
        }
    }

    // Scaling flip: density-2 lattice, threshold rho/1.4 at scale 1.
    let dense = PointDistribution::sine_lattice(std::f64::consts::PI, 10_000);
    let sigma = std::f64::consts::PI / 1.4;
    let wide = SweepGrid::geometric(10.0, 7000.0, 25, 2.0, 64.0, 6).unwrap();
    let mut flip_ok = true;
    for (lambda, expect) in [
        (1.0, Verdict::EvidenceSatisfied),
        (1.35, Verdict::EvidenceSatisfied),
        (1.45, Verdict::EvidenceViolated),
        (2.0, Verdict::EvidenceViolated),
    ] {
        let scaled = vertical_segment(sigma * lambda);
        let rep = evaluate_ng(&dense, &scaled, &wide).unwrap();
        if rep.verdict_geq != expect {
            flip_ok = false;
            detail = format!(
                "scale {lambda}: verdict {} (threshold {}, estimate {})",
                rep.verdict_geq.as_str(),
                rep.threshold,
                rep.estimate
            );
        }
    }

    let pass = monotone && flip_ok;
    if detail.is_empty() {
        detail = "7 criteria monotone under 100 added points; verdict flips across the critical scale 1.4".to_string();
    }
    conclude(8, "monotonicity and threshold scaling", pass, &detail);
}
