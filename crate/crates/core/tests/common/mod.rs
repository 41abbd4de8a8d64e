//! Brute-force reference computations over every ordered dataset in Z^n.
#![allow(dead_code)]

use gibbs_info::DiscreteProblem;

pub struct Measures {
    pub mutual: f64,
    pub lautum: f64,
    pub chi2: f64,
    pub gen: f64,
}

impl Measures {
    pub fn skl(&self) -> f64 {
        self.mutual + self.lautum
    }
}

/// Every sequence in `0..k` of length `n`, with its probability under `mu`.
pub fn all_sequences(n: usize, mu: &[f64]) -> Vec<(Vec<usize>, f64)> {
    let k = mu.len();
    let mut out = Vec::new();
    let mut seq = vec![0usize; n];
    loop {
        let prob: f64 = seq.iter().map(|&z| mu[z]).product();
        out.push((seq.clone(), prob));
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            seq[i] += 1;
            if seq[i] < k {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Posterior computed directly from the softmax definition (no log domain).
pub fn posterior(problem: &DiscreteProblem, gamma: f64, seq: &[usize]) -> Vec<f64> {
    let prior = problem.prior().values();
    let raw: Vec<f64> = (0..problem.num_hypotheses())
        .map(|w| {
            let risk = seq.iter().map(|&z| problem.loss(w, z)).sum::<f64>() / seq.len() as f64;
            prior[w] * (-gamma * risk).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

fn measures_from_joint(joint: &[Vec<f64>], left: &[f64], right: &[f64]) -> (f64, f64, f64) {
    let (mut mi, mut la, mut chi) = (0.0, 0.0, 0.0);
    for (a, row) in joint.iter().enumerate() {
        for (b, &p) in row.iter().enumerate() {
            let q = left[a] * right[b];
            if q == 0.0 {
                continue;
            }
            if p > 0.0 {
                mi += p * (p / q).ln();
                la += q * (q / p).ln();
            }
            chi += (p - q) * (p - q) / q;
        }
    }
    (mi, la, chi)
}

fn population_risk(problem: &DiscreteProblem, w: usize) -> f64 {
    let mu = problem.mu().values();
    (0..problem.num_instances()).map(|z| mu[z] * problem.loss(w, z)).sum()
}

/// Measures between W and the whole dataset, plus gen from population minus
/// empirical risk.
pub fn joint(problem: &DiscreteProblem, gamma: f64, n: usize) -> Measures {
    let nw = problem.num_hypotheses();
    let seqs = all_sequences(n, problem.mu().values());
    let posts: Vec<Vec<f64>> = seqs.iter().map(|(s, _)| posterior(problem, gamma, s)).collect();
    let probs: Vec<f64> = seqs.iter().map(|(_, p)| *p).collect();
    let mut marginal = vec![0.0; nw];
    for (post, p) in posts.iter().zip(&probs) {
        for w in 0..nw {
            marginal[w] += p * post[w];
        }
    }
    let joint_table: Vec<Vec<f64>> = (0..nw)
        .map(|w| posts.iter().zip(&probs).map(|(post, p)| p * post[w]).collect())
        .collect();
    let (mutual, lautum, chi2) = measures_from_joint(&joint_table, &marginal, &probs);
    let mut gen = 0.0;
    for ((s, p), post) in seqs.iter().zip(&posts) {
        for w in 0..nw {
            let emp = s.iter().map(|&z| problem.loss(w, z)).sum::<f64>() / n as f64;
            gen += p * post[w] * (population_risk(problem, w) - emp);
        }
    }
    Measures {
        mutual,
        lautum,
        chi2,
        gen,
    }
}

/// Measures between W and the `i`-th sample.
pub fn individual(problem: &DiscreteProblem, gamma: f64, n: usize, i: usize) -> Measures {
    let nw = problem.num_hypotheses();
    let nz = problem.num_instances();
    let mu = problem.mu().values();
    let mut table = vec![vec![0.0; nz]; nw];
    let mut gen = 0.0;
    for (s, p) in all_sequences(n, mu) {
        let post = posterior(problem, gamma, &s);
        for w in 0..nw {
            table[w][s[i]] += p * post[w];
            gen += p * post[w] * (population_risk(problem, w) - problem.loss(w, s[i]));
        }
    }
    let marginal: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    let (mutual, lautum, chi2) = measures_from_joint(&table, &marginal, mu);
    Measures {
        mutual,
        lautum,
        chi2,
        gen,
    }
}

/// The Jensen gap at sample index `i` by direct enumeration of the other samples.
pub fn jensen_gap(problem: &DiscreteProblem, gamma: f64, n: usize, i: usize) -> Vec<Vec<f64>> {
    let nw = problem.num_hypotheses();
    let nz = problem.num_instances();
    let mu = problem.mu().values();
    let rest = all_sequences(n - 1, mu);
    let mut gap = vec![vec![0.0; nz]; nw];
    for z in 0..nz {
        let mut avg = vec![0.0; nw];
        let mut avg_log = vec![0.0; nw];
        for (r, p) in &rest {
            let mut s = r.clone();
            s.insert(i, z);
            let post = posterior(problem, gamma, &s);
            for w in 0..nw {
                avg[w] += p * post[w];
                avg_log[w] += p * post[w].ln();
            }
        }
        for w in 0..nw {
            gap[w][z] = avg[w].ln() - avg_log[w];
        }
    }
    gap
}
