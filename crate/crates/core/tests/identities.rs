//! Operator-identity battery over a seeded random corpus: the double-curl
//! inversion, the order-s identity sweep, the projection coincidence, the
//! L² contraction, the torus coincidence of the bounded compositions, and
//! the bounded-domain norm chain.

use nslab_core::criteria;
use nslab_core::generators;
use nslab_core::norms;
use nslab_core::operators::{
    a_power, b0_apply, b1_apply, b2_apply, b3_apply, curl, curl_curl_residual, gradient,
    reconstruct_velocity, FractionalOrder,
};
use nslab_core::{GridSpec, SpectralScalarField};
use num_complex::Complex;

fn grid(n: usize) -> GridSpec {
    GridSpec::cubic(n).unwrap()
}

fn order(s: f64) -> FractionalOrder {
    FractionalOrder::new(s).unwrap()
}

/// Mean-free but deliberately non-solenoidal: solenoidal part plus the
/// gradient of a seeded potential.
fn mixed_field(g: GridSpec, seed: u64) -> nslab_core::SpectralVectorField {
    let sol = generators::random_solenoidal(g, seed, 1.0);
    let mut phi = SpectralScalarField::zero(g);
    let modes = [[1i64, 0, 0], [2, -1, 0], [0, 1, 3], [1, 1, 1]];
    for (i, &k) in modes.iter().enumerate() {
        let re = (seed.wrapping_add(i as u64 * 7919) % 1000) as f64 / 1000.0 - 0.5;
        let im = (seed.wrapping_add(i as u64 * 104729) % 1000) as f64 / 1000.0 - 0.5;
        phi.set_conjugate_pair(k, Complex::new(re, im));
    }
    sol.add(&gradient(&phi))
}

#[test]
fn transform_round_trips_across_resolutions() {
    for n in [8usize, 16, 32] {
        let g = grid(n);
        for seed in 0..100u64 {
            let f = generators::random_solenoidal(g, seed, 1.0);
            let back = f.to_physical().unwrap().to_spectral();
            assert!(
                f.relative_l2_distance(&back) < 1e-12,
                "n {n}, seed {seed}: {}",
                f.relative_l2_distance(&back)
            );
        }
    }
}

#[test]
fn spectral_curl_against_finite_differences() {
    // Independent oracle: second-order central differences on the lattice.
    // Every active Taylor-Green derivative acts on a |k| = 1 factor, so the
    // stencil damps the exact curl by exactly sin(h)/h; the relative L2
    // error must match 1 - sinc(h) and shrink by 4x per halving of h.
    let mut errors = Vec::new();
    for n in [16usize, 32] {
        let g = grid(n);
        let u = generators::taylor_green(g);
        let u_phys = u.to_physical().unwrap();
        let exact = curl(&u).to_physical().unwrap();
        let h = g.spacing();
        let np = g.n();
        let deriv = |comp: usize, axis: usize, i: usize, j: usize, l: usize| -> f64 {
            let (mut ip, mut im) = ([i, j, l], [i, j, l]);
            ip[axis] = (ip[axis] + 1) % np;
            im[axis] = (im[axis] + np - 1) % np;
            let s = u_phys.samples(comp);
            (s[g.mode_index(ip[0], ip[1], ip[2])] - s[g.mode_index(im[0], im[1], im[2])])
                / (2.0 * h)
        };
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..np {
            for j in 0..np {
                for l in 0..np {
                    let idx = g.mode_index(i, j, l);
                    let fd = [
                        deriv(2, 1, i, j, l) - deriv(1, 2, i, j, l),
                        deriv(0, 2, i, j, l) - deriv(2, 0, i, j, l),
                        deriv(1, 0, i, j, l) - deriv(0, 1, i, j, l),
                    ];
                    for c in 0..3 {
                        let e = fd[c] - exact.samples(c)[idx];
                        num += e * e;
                        den += exact.samples(c)[idx] * exact.samples(c)[idx];
                    }
                }
            }
        }
        let rel = (num / den).sqrt();
        let want = 1.0 - h.sin() / h;
        assert!((rel - want).abs() < 1e-10, "n {n}: {rel} vs {want}");
        errors.push(rel);
    }
    let ratio = errors[0] / errors[1];
    assert!((3.5..4.5).contains(&ratio), "second order: ratio {ratio}");
}

#[test]
fn double_curl_inversion_on_the_corpus() {
    let g = grid(16);
    for seed in 0..100u64 {
        let v = generators::random_solenoidal(g, seed, 1.0);
        let back = a_power(order(-1.0), &curl(&curl(&v))).unwrap();
        let defect = back.max_coefficient_distance(&v);
        assert!(
            defect <= 1e-12 * v.max_amplitude(),
            "seed {seed}: coefficient defect {defect:e}"
        );
        // And through the vorticity route.
        let rebuilt = reconstruct_velocity(&curl(&v)).unwrap();
        assert!(rebuilt.relative_l2_distance(&v) <= 1e-10, "seed {seed}");
    }
}

#[test]
fn order_sweep_of_the_curl_curl_identity() {
    let g = grid(16);
    for seed in 0..100u64 {
        let v = generators::random_solenoidal(g, seed, 1.0);
        for s in [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let r = curl_curl_residual(&v, order(s)).unwrap();
            assert!(r <= 1e-10, "seed {seed}, s {s}: residual {r:e}");
        }
    }
}

#[test]
fn projection_coincidence_on_mean_free_fields() {
    for n in [16usize, 32] {
        let g = grid(n);
        for seed in 0..20u64 {
            let f = mixed_field(g, seed);
            assert!(f.is_mean_free());
            let via_composition = b0_apply(&f).unwrap();
            let via_projection = f.leray_project();
            let defect = via_composition.max_coefficient_distance(&via_projection);
            assert!(
                defect <= 1e-12 * f.max_amplitude(),
                "n {n}, seed {seed}: defect {defect:e}"
            );
        }
    }
}

#[test]
fn l2_contraction_of_the_shifted_curl() {
    let g = grid(16);
    for seed in 0..100u64 {
        let v = generators::random_solenoidal(g, seed, 1.0);
        let image = b1_apply(&v).unwrap();
        let num = norms::spectral_l2_norm(&image);
        let den = norms::spectral_l2_norm(&v);
        assert!(num <= (1.0 + 1e-12) * den, "seed {seed}: {num} > {den}");
    }
    // Non-solenoidal inputs contract strictly (the gradient part is killed).
    let f = mixed_field(g, 3);
    let image = b1_apply(&f).unwrap();
    assert!(norms::spectral_l2_norm(&image) < norms::spectral_l2_norm(&f));
}

#[test]
fn torus_coincidence_of_compositions() {
    let g = grid(16);
    for seed in 0..25u64 {
        let v = generators::random_solenoidal(g, seed, 1.0);
        let one = b1_apply(&v).unwrap();
        let two = b2_apply(&v).unwrap();
        assert!(
            one.max_coefficient_distance(&two) <= 1e-12 * v.max_amplitude(),
            "seed {seed}"
        );
        for s in [-1.0, 0.0, 0.5, 2.0] {
            let three = b3_apply(order(s), &v).unwrap();
            assert!(
                one.max_coefficient_distance(&three) <= 1e-12 * v.max_amplitude(),
                "seed {seed}, s {s}"
            );
        }
    }
}

#[test]
fn curl_of_gradient_and_divergence_of_curl_vanish() {
    let g = grid(16);
    for seed in 0..25u64 {
        let f = mixed_field(g, seed);
        let c = curl(&f);
        assert!(
            c.divergence().max_amplitude() <= 1e-12 * f.max_amplitude(),
            "seed {seed}: div curl"
        );
        let mut phi = SpectralScalarField::zero(g);
        phi.set_conjugate_pair([1, 2, 0], Complex::new(0.3 + seed as f64 * 1e-3, -0.1));
        let grad = gradient(&phi);
        assert!(
            curl(&grad).max_amplitude() <= 1e-12 * grad.max_amplitude(),
            "seed {seed}: curl grad"
        );
    }
}

#[test]
fn bounded_domain_norm_chain_on_the_corpus() {
    let g = grid(16);
    for seed in 0..40u64 {
        let f = generators::random_solenoidal(g, seed, 1.0)
            .to_physical()
            .unwrap();
        for r in [2.0, 4.0, 8.0, 16.0] {
            let c = norms::lebesgue_chain(&f, r).unwrap();
            assert!(c.holds(1e-12), "seed {seed}, r {r}");
            assert!(
                c.lhs <= c.coarse_bound() * (1.0 + 1e-12),
                "coarse |Ω| branch, seed {seed}, r {r}"
            );
        }
    }
}

#[test]
fn one_derivative_shift_across_the_corpus() {
    let g = grid(16);
    for seed in 0..40u64 {
        let u = generators::random_solenoidal(g, seed, 1.0);
        let rows = criteria::norm_equivalence_probe(&u, &[2.0, 4.0, f64::INFINITY]).unwrap();
        for row in rows {
            assert!(
                (row.vorticity_shifted_norm - row.composition_norm).abs()
                    <= 1e-10 * row.composition_norm,
                "seed {seed}, p {}",
                row.p
            );
        }
    }
    // Curl eigenfields: the shifted vorticity norm equals the plain norm.
    for k in [1u32, 2, 3] {
        let v = generators::beltrami(g, k, 1.0).unwrap();
        for row in criteria::norm_equivalence_probe(&v, &[2.0, 4.0, f64::INFINITY]).unwrap() {
            assert!(
                (row.vorticity_shifted_norm - row.velocity_norm).abs()
                    <= 1e-12 * row.velocity_norm,
                "k {k}, p {}",
                row.p
            );
        }
    }
}

#[test]
fn regression_statistics_of_the_shifted_norm_ratios() {
    // Boundedness for p other than 2 is recorded, not asserted: the
    // constants exist but their values are not pinned, so the suite keeps
    // min/max/mean as a drift alarm with generous brackets.
    let g = grid(16);
    let mut by_p: Vec<(f64, Vec<f64>)> =
        vec![(2.0, Vec::new()), (4.0, Vec::new()), (f64::INFINITY, Vec::new())];
    for seed in 0..40u64 {
        let u = generators::random_solenoidal(g, seed, 1.0);
        let rows = criteria::norm_equivalence_probe(&u, &[2.0, 4.0, f64::INFINITY]).unwrap();
        for (slot, row) in by_p.iter_mut().zip(rows) {
            slot.1.push(row.vorticity_shifted_norm / row.velocity_norm);
        }
    }
    for (p, ratios) in by_p {
        let stats = criteria::RatioStats::from_ratios(ratios).unwrap();
        assert!(stats.min > 0.0 && stats.max.is_finite(), "p {p}");
        if p == 2.0 {
            assert!(stats.max <= 1.0 + 1e-12, "L² contraction");
        } else {
            assert!(stats.max < 10.0, "p {p}: max ratio {}", stats.max);
        }
    }
}
