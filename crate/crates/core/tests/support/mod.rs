//! Independent oracles and property sweeps shared by the integration tests
//! and the acceptance runner.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};
use statrs::function::erf::erfc;

use debrisense::link::{
    compute_ber, frame_from_symbols, qpsk_demodulate, qpsk_modulate, symbols_from_frame, transmit, zf_equalize,
    CsiEstimate, CsiMethod,
};
use debrisense::mimo::{apply_rician_smallscale, steering_vector, CMatrix, Direction};
use debrisense::propagation::path_delay;
use debrisense::rng::rng_from_seed;
use debrisense::scene::generate_scene;
use debrisense::sensing::{extract_features, smo_solve, Kernel};
use debrisense::{DebrisClass, LinkGeometry, MaterialProperties, Mechanism, PathGeometry, SceneConfig};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

// ---------------------------------------------------------------- series

/// Plain partial sum of `Σ g^m/(m!·m)` for `v_xy = 0`.
pub fn beckmann_partial_sum(g: f64, terms: usize) -> f64 {
    let mut term_num = 1.0;
    let mut sum = 0.0;
    for m in 1..=terms {
        term_num *= g / m as f64;
        sum += term_num / m as f64;
    }
    sum
}

// ------------------------------------------------------------------- link

/// `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub struct AwgnPoint {
    pub ebn0_db: f64,
    pub bits: usize,
    pub ber: f64,
    pub theory: f64,
    pub sigma: f64,
}

impl AwgnPoint {
    pub fn z_score(&self) -> f64 {
        (self.ber - self.theory) / self.sigma
    }
}

/// QPSK through a unit SISO channel with perfect CSI and ZF.
pub fn siso_awgn_ber(ebn0_db: f64, bits: usize, seed: u64) -> AwgnPoint {
    let mut r = rng(seed);
    let tx: Vec<u8> = (0..bits).map(|_| r.random_range(0..2u8)).collect();
    let x = frame_from_symbols(&qpsk_modulate(&tx).unwrap(), 1).unwrap();
    let h = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    let es_n0_db = ebn0_db + 10.0 * 2f64.log10();
    let (y, _) = transmit(&h, &x, es_n0_db, &mut r).unwrap();
    let csi = CsiEstimate { matrix: h, method: CsiMethod::Perfect, pilot_noise_variance: 0.0 };
    let rx = qpsk_demodulate(&symbols_from_frame(&zf_equalize(&y, &csi).unwrap()));
    let ber = compute_ber(&tx, &rx).unwrap();
    let theory = q_function((2.0 * 10f64.powf(ebn0_db / 10.0)).sqrt());
    let sigma = (theory * (1.0 - theory) / bits as f64).sqrt();
    AwgnPoint { ebn0_db, bits, ber, theory, sigma }
}

// -------------------------------------------------------------------- SVM

pub fn kernel_matrix(x: &[Vec<f64>], kernel: &Kernel) -> Vec<Vec<f64>> {
    x.iter().map(|a| x.iter().map(|b| kernel.eval(a, b)).collect()).collect()
}

pub fn dual_objective(alpha: &[f64], y: &[f64], k: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Exact soft-margin dual optimum by enumerating every assignment of the
/// multipliers to {0, C, free} and solving the equality-constrained
/// stationarity system on the free set.
pub fn exhaustive_dual(x: &[Vec<f64>], y: &[f64], kernel: &Kernel, c: f64) -> f64 {
    let n = x.len();
    let k = kernel_matrix(x, kernel);
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let mut best = f64::NEG_INFINITY;
    let mut state = vec![0u8; n];
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut v = code;
        for s in state.iter_mut() {
            *s = (v % 3) as u8;
            v /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let upper: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut alpha = vec![0.0; n];
        for &i in &upper {
            alpha[i] = c;
        }
        let bound_sum: f64 = upper.iter().map(|&i| y[i] * c).sum();
        if free.is_empty() {
            if bound_sum.abs() > 1e-12 * c {
                continue;
            }
        } else {
            let m = free.len();
            let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut rhs = DVector::<f64>::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q(i, j);
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                rhs[r] = 1.0 - upper.iter().map(|&j| q(i, j) * c).sum::<f64>();
            }
            rhs[m] = -bound_sum;
            let Some(sol) = a.lu().solve(&rhs) else { continue };
            let tol = 1e-9 * c;
            if free.iter().enumerate().any(|(r, _)| sol[r] < -tol || sol[r] > c + tol) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        best = best.max(dual_objective(&alpha, y, &k));
    }
    best
}

pub struct QpInstance {
    pub name: String,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub kernel: Kernel,
    pub c: f64,
}

/// Ten random separable-ish instances of 6–12 points plus a noisy XOR.
pub fn qp_instances() -> Vec<QpInstance> {
    let mut out = Vec::new();
    let mut r = rng(2024);
    for t in 0..10 {
        let n = 6 + t % 7;
        let d = 2 + t % 3;
        let w: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut x = Vec::new();
        let mut y = Vec::new();
        while x.len() < n {
            let p: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
            let s: f64 = p.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + r.random_range(-0.3..0.3);
            y.push(if s >= 0.0 { 1.0 } else { -1.0 });
            x.push(p);
        }
        if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v < 0.0) {
            y[0] = -y[0];
        }
        let kernel = if t % 2 == 0 { Kernel::Rbf { gamma: 0.5 + t as f64 * 0.1 } } else { Kernel::Rbf { gamma: 2.0 } };
        let c = [0.5, 1.0, 10.0][t % 3];
        out.push(QpInstance { name: format!("random{t}_n{n}"), x, y, kernel, c });
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..12 {
        let (a, b) = ([1.0, -1.0][i % 2], [1.0, -1.0][(i / 2) % 2]);
        let jitter = 0.05 * i as f64 / 12.0;
        x.push(vec![a + jitter, b - jitter]);
        y.push(a * b);
    }
    out.push(QpInstance { name: "xor_n12".into(), x, y, kernel: Kernel::Rbf { gamma: 1.0 }, c: 10.0 });
    out
}

pub struct QpComparison {
    pub name: String,
    pub smo: f64,
    pub smo_reported: f64,
    pub oracle: f64,
}

impl QpComparison {
    pub fn rel_gap(&self) -> f64 {
        rel_err(self.smo, self.oracle)
    }
}

pub fn compare_smo(inst: &QpInstance, tol: f64) -> QpComparison {
    let sol = smo_solve(&inst.x, &inst.y, &inst.kernel, inst.c, tol, 100_000, 1).unwrap();
    let k = kernel_matrix(&inst.x, &inst.kernel);
    QpComparison {
        name: inst.name.clone(),
        smo: dual_objective(&sol.alpha, &inst.y, &k),
        smo_reported: sol.dual_objective,
        oracle: exhaustive_dual(&inst.x, &inst.y, &inst.kernel, inst.c),
    }
}

// --------------------------------------------------------------- features

/// Two-pass moments by summation over sorted values.
pub fn brute_moments(z: &[Complex64]) -> [f64; 5] {
    let mut m: Vec<f64> = z.iter().map(|v| v.norm()).collect();
    m.sort_by(f64::total_cmp);
    let n = m.len() as f64;
    let mean = m.iter().sum::<f64>() / n;
    let var = m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = m.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    [mean, var, m[m.len() - 1], m[0], m3 / var.powf(1.5)]
}

/// Largest relative deviation of `extract_features` from the brute-force
/// moments over `count` random matrices.
pub fn feature_oracle_max_err(count: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let (nr, nc) = (r.random_range(1..40usize), r.random_range(2..40usize));
        let scale = 10f64.powf(r.random_range(-12.0..2.0));
        let h = CMatrix::from_fn(nr, nc, |_, _| {
            Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)) * scale
        });
        let got = extract_features(h.iter()).unwrap().to_array();
        let want = brute_moments(h.as_slice());
        for (g, w) in got.iter().zip(want) {
            worst = worst.max(rel_err(*g, w));
        }
    }
    worst
}

// ------------------------------------------------------------- properties

fn random_scene_config(r: &mut impl Rng) -> SceneConfig {
    let geometry = LinkGeometry::new(r.random_range(50.0..2000.0), r.random_range(0.0..15.0)).unwrap();
    let minor = [r.random_range(1.0..100.0), r.random_range(1.0..100.0)];
    let class = if r.random_bool(0.5) { DebrisClass::SmoothGlass } else { DebrisClass::RoughMetal };
    let mut cfg = SceneConfig::spheroid(geometry, minor, 0.0, class, MaterialProperties::default_smooth_glass(), 0.05);
    cfg.density_per_km3 = r.random_range(0.5..6.0) / cfg.volume_km3();
    cfg
}

pub struct DelayReport {
    pub scenes: usize,
    pub paths: usize,
    pub violations: usize,
    pub skipped: usize,
}

/// Every NLoS path of every object in `scenes` random scenes is no shorter
/// than the direct path.
pub fn delay_ordering(scenes: usize, seed: u64) -> DelayReport {
    let mut r = rng(seed);
    let mut rep = DelayReport { scenes, paths: 0, violations: 0, skipped: 0 };
    for s in 0..scenes {
        let cfg = random_scene_config(&mut r);
        let scene = generate_scene(&cfg, seed ^ s as u64).unwrap();
        let tau_los = path_delay(&PathGeometry::los(&cfg.geometry)).unwrap();
        for obj in &scene.objects {
            for mech in Mechanism::NLOS {
                match PathGeometry::for_object(&cfg.geometry, obj.position_km, mech).and_then(|p| path_delay(&p)) {
                    Ok(tau) => {
                        rep.paths += 1;
                        if tau < tau_los {
                            rep.violations += 1;
                        }
                    }
                    Err(_) => rep.skipped += 1,
                }
            }
        }
    }
    rep
}

pub struct SteeringReport {
    pub max_modulus_err: f64,
    pub max_rank_ratio: f64,
}

pub fn steering_checks(trials: usize, seed: u64) -> SteeringReport {
    let mut r = rng(seed);
    let mut rep = SteeringReport { max_modulus_err: 0.0, max_rank_ratio: 0.0 };
    for _ in 0..trials {
        let dir = |r: &mut ChaCha20Rng| Direction {
            theta: r.random_range(0.0..std::f64::consts::PI),
            phi: r.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        };
        let (nr, nt) = (r.random_range(1..65usize), r.random_range(1..65usize));
        let sr = steering_vector(nr, r.random_range(0.1..2.0), dir(&mut r));
        let st = steering_vector(nt, r.random_range(0.1..2.0), dir(&mut r));
        for v in sr.iter().chain(st.iter()) {
            rep.max_modulus_err = rep.max_modulus_err.max((v.norm() - 1.0).abs());
        }
        if nr > 1 && nt > 1 {
            let sv = (&sr * st.transpose()).singular_values();
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            rep.max_rank_ratio = rep.max_rank_ratio.max(s[1] / s[0]);
        }
    }
    rep
}

/// Mean of `‖H_rician‖² / ‖H‖²` over `draws` small-scale realisations.
pub fn rician_energy_ratio(draws: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let h = CMatrix::from_fn(8, 8, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)) * 1e-9);
    let base = h.norm_squared();
    let mut sim = rng_from_seed(seed);
    let mut acc = 0.0;
    for i in 0..draws {
        let k_db = [0.0, 5.0, 10.0, 20.0][i % 4];
        acc += apply_rician_smallscale(&h, k_db, &mut sim).unwrap().norm_squared() / base;
    }
    acc / draws as f64
}

pub struct PoissonFit {
    pub lambda: f64,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² of object counts over `scenes` scenes against Poisson(λ),
/// with tail bins merged until every expected count is at least 5.
pub fn scene_poisson_fit(scenes: usize, seed: u64) -> PoissonFit {
    let geometry = LinkGeometry::new(500.0, 7.0).unwrap();
    let mut cfg = SceneConfig::spheroid(
        geometry,
        [50.0, 50.0],
        0.0,
        DebrisClass::RoughMetal,
        MaterialProperties::default_rough_metal(),
        0.05,
    );
    cfg.density_per_km3 = 4.0 / cfg.volume_km3();
    let lambda = cfg.expected_count();
    let mut counts = vec![0usize; 64];
    for s in 0..scenes {
        let n = generate_scene(&cfg, seed.wrapping_mul(1_000_003) + s as u64).unwrap().objects.len();
        counts[n.min(63)] += 1;
    }
    let pois = Poisson::new(lambda).unwrap();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    let mut k = 0usize;
    let total = scenes as f64;
    let mut cum = 0.0;
    loop {
        let p = pois.pmf(k as u64);
        obs += counts[k] as f64;
        exp += p * total;
        cum += p;
        k += 1;
        if exp >= 5.0 && (1.0 - cum) * total >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
        if (1.0 - cum) * total < 5.0 {
            let rest: f64 = counts[k..].iter().sum::<usize>() as f64;
            let last = (obs + rest, exp + (1.0 - cum) * total);
            match bins.last_mut() {
                Some(b) if last.1 < 5.0 => {
                    b.0 += last.0;
                    b.1 += last.1;
                }
                _ => bins.push(last),
            }
            break;
        }
    }
    let chi2: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let p_value = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(chi2);
    PoissonFit { lambda, chi2, dof, p_value }
}
