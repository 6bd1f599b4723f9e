use star_core::metrics;
use star_core::noise;
use star_core::prox::TensorNorm;
use star_core::solver::*;
use star_core::tensor::*;
use star_core::linalg;
use star_core::rng::SplitMix64;

/// Synthetic clean cube, exact mode-3 rank 4, values in [0,1]:
/// smooth spatial factors, orthonormal spectral basis whose first column
/// is the constant vector (so the affine rescale keeps rank 4).
fn synthetic_clean(dims: (usize, usize, usize), seed: u64) -> Cube {
    let (n1, n2, n3) = dims;
    let rank = 4usize;
    let mut rng = SplitMix64::new(seed);
    // Smooth factors: sums of low-frequency cosines.
    let mut g = Cube::zeros((n1, n2, rank)).unwrap();
    for r in 0..rank {
        let fx = 0.2 + 0.5 * rng.next_f64();
        let fy = 0.2 + 0.5 * rng.next_f64();
        let px = 6.28 * rng.next_f64();
        let py = 6.28 * rng.next_f64();
        let amp = 0.5 + rng.next_f64();
        for j in 0..n2 {
            for i in 0..n1 {
                let v = amp
                    * libm::cos(fx * i as f64 + px)
                    * libm::cos(fy * j as f64 + py);
                g.set(i, j, r, v);
            }
        }
    }
    // Orthonormal basis with constant first column.
    let mut m = Matrix::zeros(n3, rank).unwrap();
    for r in 0..n3 {
        m.set(r, 0, 1.0);
    }
    for c in 1..rank {
        for r in 0..n3 {
            m.set(r, c, rng.next_f64() - 0.5);
        }
    }
    // Gram-Schmidt.
    let mut a = Matrix::zeros(n3, rank).unwrap();
    for c in 0..rank {
        let mut col: Vec<f64> = (0..n3).map(|r| m.get(r, c)).collect();
        for prev in 0..c {
            let dot: f64 = (0..n3).map(|r| col[r] * a.get(r, prev)).sum();
            for (r, item) in col.iter_mut().enumerate() {
                *item -= dot * a.get(r, prev);
            }
        }
        let norm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (r, item) in col.iter().enumerate() {
            a.set(r, c, item / norm);
        }
    }
    let y = mode_product(&g, &a, 3).unwrap();
    let lo = y.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    y.map(|v| 0.05 + 0.9 * (v - lo) / (hi - lo))
}

fn main() {
    if std::env::args().nth(1).as_deref() == Some("stars") { stars_experiment(); return; }
    let args: Vec<String> = std::env::args().collect();
    let lambda: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let beta: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.25);
    let g1: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.5);
    let g2: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.15);

    for seed in 0..5u64 {
        let clean = synthetic_clean((24, 24, 16), 9000 + seed);
        let noisy = noise::add_gaussian(&clean, 30.0, 100 + seed).unwrap();
        let noisy_psnr = metrics::psnr(&noisy, &clean).unwrap();

        let mut stage = StageParams::uniform(lambda, Model::Star);
        stage.beta = beta;
        stage.gamma1 = g1;
        stage.gamma2 = g2;
        let schedule = Schedule { model: Model::Star, stages: vec![stage] };
        let opts = SolveOptions {
            rank: 4,
            patch: (8, 8, 4),
            stride: (4, 4, 4),
            tol: 1e-6,
            max_iters: 100,
            ..Default::default()
        };
        let t0 = std::time::Instant::now();
        let (x, report) = run(&noisy, &schedule, Mode::Classical, &opts).unwrap();
        let out_psnr = metrics::psnr(&x, &clean).unwrap();
        println!(
            "seed {seed}: noisy {noisy_psnr:6.2} -> out {out_psnr:6.2} (gain {:5.2}) iters {:3} resid {:.2e} [{:.2}s]",
            out_psnr - noisy_psnr,
            report.iterations,
            report.residuals.last().unwrap(),
            t0.elapsed().as_secs_f64(),
        );
    }
}

#[allow(dead_code)]
fn stars_experiment() {
    for seed in 0..5u64 {
        let clean = synthetic_clean((24, 24, 16), 9000 + seed);
        let g = noise::add_gaussian(&clean, 30.0, 100 + seed).unwrap();
        let noisy = noise::add_impulse(&g, 0.10, 200 + seed).unwrap();
        let noisy_psnr = metrics::psnr(&noisy, &clean).unwrap();

        let opts = SolveOptions {
            rank: 4,
            patch: (8, 8, 4),
            stride: (4, 4, 4),
            tol: 1e-6,
            max_iters: 150,
            ..Default::default()
        };

        // Plain STAR baseline on the impulse-ridden input.
        let mut st = StageParams::uniform(1.0, Model::Star);
        st.beta = 0.3;
        let gg: f64 = std::env::var("GG").ok().and_then(|v| v.parse().ok()).unwrap_or(0.04);
        st.gamma1 = gg;
        st.gamma2 = gg;
        let star_sched = Schedule { model: Model::Star, stages: vec![st.clone()] };
        let (xs, _) = run(&noisy, &star_sched, Mode::Classical, &opts).unwrap();
        let star_psnr = metrics::psnr(&xs, &clean).unwrap();

        print!("seed {seed}: noisy {noisy_psnr:6.2} star {star_psnr:6.2} | star_s:");
        let t0 = std::time::Instant::now();
        for mu in [0.10, 0.13, 0.16, 0.20, 0.25] {
            let mut sp = st.clone();
            sp.mu = Some(mu);
            let sched = Schedule { model: Model::StarS, stages: vec![sp] };
            let (x, _) = run(&noisy, &sched, Mode::Classical, &opts).unwrap();
            print!(" mu={mu}: {:.2}", metrics::psnr(&x, &clean).unwrap());
        }
        println!("  [{:.1}s]", t0.elapsed().as_secs_f64());
    }
}
