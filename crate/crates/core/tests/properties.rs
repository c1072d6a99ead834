use proptest::prelude::*;

use margin_guard::boundary::{band_membership, boundary_pairs, BoundaryConfig, BoundaryPairSet};
use margin_guard::certainty::certainty_metrics;
use margin_guard::counterexamples::{
    affine_mixture_pi, off_sphere_pi, sample_skewed_prior, AffineMixtureParams, Cutoff,
    OffSphereScenario, SkewedPriorParams,
};
use margin_guard::explain::{k_medoid, margin_distance_selection, medoid_cost, DistancingConfig};
use margin_guard::model::{ExplanationSet, LinearModel};
use margin_guard::scalar::vector;
use margin_guard::search::{
    bisect_percentile, find_alpha_analytic, linear_scan_optimal, CertaintyCurve,
};
use margin_guard::sphere::{f_theta, pi_closed_form, CapGeometry};
use margin_guard::version_space::{
    cap_from_alpha, hit_and_run_raw, polytope_from_explanations, sample_cap, SphericalCap,
    WalkConfig,
};
use margin_guard::Metric;

use std::f64::consts::FRAC_PI_2;

fn unit(v: Vec<f64>) -> Vec<f64> {
    vector::normalized(&v).unwrap_or_else(|| {
        let mut e = vec![0.0; v.len()];
        e[0] = 1.0;
        e
    })
}

fn unit_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, d).prop_map(unit)
}

fn cloud(n: std::ops::Range<usize>, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, d), n)
}

fn brute_pairs(points: &[Vec<f64>], m: &LinearModel<f64>, r: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in 0..points.len() {
            if m.predict(&points[i]) < 0
                && m.predict(&points[j]) > 0
                && vector::distance(&points[i], &points[j]) < r
            {
                out.push((i, j));
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (0..n)
        .flat_map(|last| {
            combinations(last, k - 1).into_iter().map(move |mut c| {
                c.push(last);
                c
            })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pi_nonincreasing_in_alpha(d in prop::sample::select(vec![2usize, 3, 5, 20]), psi in 0.05..1.5f64) {
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let alpha = 0.999 * k as f64 / 49.0;
            let p = pi_closed_form(&CapGeometry::from_angles(d, alpha.asin(), psi).unwrap());
            prop_assert!(p <= prev + 1e-9, "alpha {alpha}: {p} > {prev}");
            prev = p;
        }
    }

    #[test]
    fn pi_increases_in_psi_then_saturates(
        d in 2usize..30,
        phi in 0.1..1.4f64,
        a in 0.05..0.95f64,
        b in 0.05..0.95f64,
        over in 1e-6..1.0f64,
    ) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        let g = |psi: f64| pi_closed_form(&CapGeometry::from_angles(d, phi, psi).unwrap());
        let top = 2.0 * phi;
        prop_assert!(g(lo * top) < g(hi * top));
        let sat = (top + over).min(std::f64::consts::PI);
        prop_assume!(sat > top);
        prop_assert_eq!(g(sat), 1.0);
    }

    #[test]
    fn planar_pi_is_arc_ratio(phi in 0.01..1.55f64, psi in 0.01..3.0f64) {
        let p = pi_closed_form(&CapGeometry::from_angles(2, phi, psi).unwrap());
        prop_assert!((p - (psi / (2.0 * phi)).min(1.0)).abs() < 1e-9);
    }

    #[test]
    fn projected_density_support(d in 2usize..40, phi in 0.05..1.5f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let outside = phi + (FRAC_PI_2 - phi) * a.max(1e-9);
        prop_assume!(outside < FRAC_PI_2);
        prop_assert_eq!(f_theta(outside, phi, d).unwrap(), 0.0);
        prop_assert_eq!(f_theta(-outside, phi, d).unwrap(), 0.0);
        let (t1, t2) = if a < b { (a * phi, b * phi) } else { (b * phi, a * phi) };
        prop_assert!(f_theta(t2, phi, d).unwrap() <= f_theta(t1, phi, d).unwrap());
        prop_assert!(f_theta(-t2, phi, d).unwrap() <= f_theta(t1, phi, d).unwrap());
    }

    #[test]
    fn cap_samples_stay_in_cap_and_repeat(
        d in 2usize..12,
        center in prop::collection::vec(-1.0..1.0f64, 12),
        phi in 0.0..1.5f64,
        seed in any::<u64>(),
    ) {
        let cap = SphericalCap::new(unit(center[..d].to_vec()), phi).unwrap();
        let s = sample_cap(&cap, 200, seed);
        prop_assert!(s.iter().all(|w| cap.contains(w)));
        prop_assert_eq!(s, sample_cap(&cap, 200, seed));
    }

    #[test]
    fn walk_stays_feasible_and_repeats(
        w_star in unit_vec(3),
        pts in cloud(1..12, 3),
        seed in any::<u64>(),
    ) {
        let m = LinearModel::homogeneous(w_star);
        let expl = ExplanationSet::from_model(&m, pts).unwrap();
        let poly = polytope_from_explanations(&expl, 1.0).unwrap();
        let cfg = WalkConfig { n: 50, burn_in: 100, thin: 5, seed, stream: 0 };
        match hit_and_run_raw(&poly, &cfg) {
            Ok(s) => {
                for x in &s {
                    for h in &poly.halfspaces {
                        prop_assert!(h.slack(x) >= -1e-9);
                    }
                }
                prop_assert_eq!(s, hit_and_run_raw(&poly, &cfg).unwrap());
            }
            Err(e) => {
                let expected = matches!(e, margin_guard::Error::Infeasible(_) | margin_guard::Error::StuckWalk { .. });
                prop_assert!(expected, "unexpected walk error {:?}", e);
            }
        }
    }

    #[test]
    fn pruned_pairs_equal_brute_force(
        pts in cloud(2..80, 4),
        w in prop::collection::vec(-1.0..1.0f64, 4),
        b in -0.5..0.5f64,
        r in 0.05..1.5f64,
    ) {
        let m = LinearModel::new(w, b);
        prop_assume!(vector::norm(&m.w) > 1e-6);
        let got = boundary_pairs(&pts, &m, &BoundaryConfig::new(r).unwrap()).unwrap();
        prop_assert_eq!(got.pairs, brute_pairs(&pts, &m, r));
    }

    #[test]
    fn two_way_pairs_are_symmetric(pts in cloud(2..60, 3), w in unit_vec(3), r in 0.05..1.0f64) {
        let m = LinearModel::homogeneous(w);
        let got = boundary_pairs(&pts, &m, &BoundaryConfig::new(r).unwrap().both_directions()).unwrap();
        for &(i, j) in &got.pairs {
            prop_assert!(got.pairs.binary_search(&(j, i)).is_ok());
        }
    }

    #[test]
    fn sphere_pair_members_are_in_band(pts in cloud(2..120, 3), w in unit_vec(3), r in 0.05..1.0f64) {
        let pts: Vec<Vec<f64>> = pts.into_iter().map(unit).collect();
        let m = LinearModel::homogeneous(w.clone());
        let got = boundary_pairs(&pts, &m, &BoundaryConfig::new(r).unwrap()).unwrap();
        let band = band_membership(&pts, &w, r).unwrap();
        for k in got.members() {
            prop_assert!(band[k]);
        }
    }

    #[test]
    fn estimates_are_lattice_values_and_metrics_ordered(
        pts in cloud(2..20, 3),
        models in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 1..60),
        raw_pairs in prop::collection::vec((0usize..20, 0usize..20), 1..40),
    ) {
        let n_pts = pts.len();
        let mut pairs: Vec<(usize, usize)> = raw_pairs.into_iter().map(|(i, j)| (i % n_pts, j % n_pts)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        let samples: Vec<_> = models.into_iter().map(LinearModel::homogeneous).collect();
        let n = samples.len() as f64;
        let rep = certainty_metrics(&samples, &pts, &BoundaryPairSet { pairs }).unwrap().unwrap();
        for e in &rep.per_pair {
            let k = e.pi_hat * n;
            prop_assert!((k - k.round()).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&e.pi_hat));
        }
        prop_assert!(rep.max_pi >= rep.top5_mean && rep.top5_mean >= rep.mean_pi - 1e-12);
        prop_assert_eq!(Metric::Max.of(&rep), rep.max_pi);
    }

    #[test]
    fn distancing_is_nested_balanced_and_margin_ordered(
        entries in prop::collection::vec((0.0..5.0f64, any::<bool>()), 0..60),
        l1 in 0.0..=100.0f64,
        l2 in 0.0..=100.0f64,
    ) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let margins: Vec<f64> = entries.iter().map(|e| (e.0 * 4.0).round() / 4.0).collect();
        let labels: Vec<i8> = entries.iter().map(|e| if e.1 { 1 } else { -1 }).collect();
        let pts = margins.iter().map(|&m| vec![m]).collect();
        let expl = ExplanationSet::new(pts, labels.clone(), margins.clone()).unwrap();
        let keep_lo = margin_distance_selection(&expl, &DistancingConfig::new(lo).unwrap()).unwrap();
        let keep_hi = margin_distance_selection(&expl, &DistancingConfig::new(hi).unwrap()).unwrap();
        prop_assert!(keep_hi.iter().all(|i| keep_lo.contains(i)));

        for c in [-1i8, 1] {
            let m_c = labels.iter().filter(|&&y| y == c).count();
            let kept_c = keep_hi.iter().filter(|&&i| labels[i] == c).count();
            prop_assert_eq!(m_c - kept_c, (hi * m_c as f64 / 100.0).floor() as usize);
            let removed_max = (0..labels.len())
                .filter(|i| labels[*i] == c && !keep_hi.contains(i))
                .map(|i| margins[i])
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(keep_hi.iter().filter(|&&i| labels[i] == c).all(|&i| margins[i] >= removed_max));
        }
    }

    #[test]
    fn medoids_are_swap_optimal_and_bounded_by_exhaustive(pts in cloud(1..11, 2), k in 1usize..4) {
        prop_assume!(k <= pts.len());
        let got = k_medoid(&pts, k, 0).unwrap();
        prop_assert!((got.objective - medoid_cost(&pts, &got.indices)).abs() <= 1e-12);
        let best = combinations(pts.len(), k)
            .iter()
            .map(|c| medoid_cost(&pts, c))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(got.objective >= best - 1e-12);
        for slot in 0..k {
            for o in (0..pts.len()).filter(|o| !got.indices.contains(o)) {
                let mut alt = got.indices.clone();
                alt[slot] = o;
                prop_assert!(medoid_cost(&pts, &alt) >= got.objective - 1e-12);
            }
        }
    }

    #[test]
    fn bisection_matches_scan_on_monotone_curves(
        steps in prop::collection::vec(0.0..0.2f64, 1..20),
        kappa in 0.0..1.0f64,
    ) {
        let mut v = 1.0;
        let values: Vec<f64> = steps.iter().map(|s| { v -= s; v }).collect();
        let grid: Vec<f64> = (0..values.len()).map(|i| 5.0 * i as f64).collect();
        let c = CertaintyCurve::from_values(grid, values, Metric::Max, 0.1).unwrap();
        prop_assert_eq!(bisect_percentile(&c, kappa), linear_scan_optimal(&c, kappa));
    }

    #[test]
    fn achieved_bisection_meets_kappa(values in prop::collection::vec(0.0..1.0f64, 1..20), kappa in 0.0..1.0f64) {
        let grid: Vec<f64> = (0..values.len()).map(|i| 5.0 * i as f64).collect();
        let c = CertaintyCurve::from_values(grid, values.clone(), Metric::Max, 0.1).unwrap();
        if let Some(l) = bisect_percentile(&c, kappa) {
            prop_assert!(values[(l / 5.0) as usize] <= kappa);
        }
    }

    #[test]
    fn analytic_alpha_brackets_kappa(d in 2usize..30, psi in 0.05..1.2f64, kappa in 0.05..0.99f64) {
        let tol = 1e-6;
        let g = CapGeometry::from_angles(d, 0.1, psi).unwrap();
        if let Some(alpha) = find_alpha_analytic(d, psi, kappa, tol).unwrap() {
            prop_assert!(pi_closed_form(&g.with_alpha(alpha).unwrap()) <= kappa);
            if alpha > (psi / 2.0).sin() + tol {
                prop_assert!(pi_closed_form(&g.with_alpha(alpha - tol).unwrap()) > kappa);
            }
        }
    }

    #[test]
    fn affine_mixture_floor_and_monotone(g1 in 0.01..FRAC_PI_2, g2 in 0.01..FRAC_PI_2, psi in 0.01..3.0f64) {
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let at = |gamma| affine_mixture_pi(&AffineMixtureParams { gamma, psi }).unwrap();
        prop_assert!(at(lo) >= 1.0 / 3.0);
        prop_assert!(at(lo) <= at(hi) + 1e-15);
    }

    #[test]
    fn off_sphere_smaller_cutoff_is_not_more_certain(
        gamma in 0.01..0.3f64,
        dmu in 0.01..0.2f64,
        dtheta in 0.01..0.2f64,
        dnu in 0.01..0.5f64,
    ) {
        let s = OffSphereScenario {
            gamma,
            mu: gamma + dmu,
            theta: gamma + dmu + dtheta,
            nu: gamma + dmu + dtheta + dnu,
            ..OffSphereScenario::reference()
        };
        prop_assume!(s.validate().is_ok());
        let p1 = off_sphere_pi(&s, Cutoff::Alpha1).unwrap();
        let p2 = off_sphere_pi(&s, Cutoff::Alpha2).unwrap();
        prop_assert!(p2 < p1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn skewed_shell_draws_lie_between_caps(seed in any::<u64>(), a2 in 0.3..0.6f64) {
        let p = SkewedPriorParams { alpha2: a2, ..SkewedPriorParams::default() };
        let mut e1 = vec![0.0; p.d];
        e1[0] = 1.0;
        let outer = cap_from_alpha(&e1, p.alpha1).unwrap();
        let inner = cap_from_alpha(&e1, p.alpha2).unwrap();
        for (w, shell) in sample_skewed_prior(&p, 500, seed).unwrap() {
            prop_assert!(outer.contains(&w));
            if shell {
                prop_assert!(!inner.contains(&w) || (w[0] - inner.half_angle.cos()).abs() < 1e-12);
            }
        }
    }
}
