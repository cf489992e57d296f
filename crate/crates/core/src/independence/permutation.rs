//! Permutation-based HSIC p-values.
//!
//! Reference oracle for calibrating the gamma approximation. Too slow for use
//! inside discovery; the statistic here is computed from dense, explicitly
//! centered Gram matrices, independently of the packed path in [`super::hsic`].

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::hsic::median_bandwidth;

fn dense_gram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let s = median_bandwidth(x);
    let scale = -0.5 / (s * s);
    let mut g = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let d = x[a] - x[b];
            g[a * n + b] = (scale * d * d).exp();
        }
    }
    g
}

fn double_center(g: &mut [f64], n: usize) {
    let rm: Vec<f64> = (0..n).map(|a| g[a * n..(a + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let gm = rm.iter().sum::<f64>() / n as f64;
    for a in 0..n {
        for b in 0..n {
            g[a * n + b] += gm - rm[a] - rm[b];
        }
    }
}

/// `(statistic, p_value)` where the p-value is `(1 + #{T_perm >= T}) / (1 + shuffles)`.
pub fn permutation_hsic(u: &[f64], v: &[f64], shuffles: usize, seed: u64) -> (f64, f64) {
    let n = u.len();
    assert_eq!(n, v.len());
    let mut k = dense_gram(u);
    double_center(&mut k, n);
    let l = dense_gram(v);
    // sum(Kc * Lc) == sum(Kc * L) because Kc is doubly centered.
    let stat_for = |perm: &[usize]| -> f64 {
        let mut s = 0.0;
        for a in 0..n {
            let pa = perm[a] * n;
            let krow = &k[a * n..(a + 1) * n];
            for (b, kv) in krow.iter().enumerate() {
                s += kv * l[pa + perm[b]];
            }
        }
        s / n as f64
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let observed = stat_for(&perm);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exceed = 0usize;
    for _ in 0..shuffles {
        perm.shuffle(&mut rng);
        if stat_for(&perm) >= observed {
            exceed += 1;
        }
    }
    (observed, (1 + exceed) as f64 / (1 + shuffles) as f64)
}
