//! Direct-definition oracles shared by the integration tests. They work on
//! raw label vectors and never touch the confusion matrix.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;

pub struct Pairs {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

/// Classifies every unordered pair of elements.
pub fn enumerate_pairs(a: &[usize], b: &[usize]) -> Pairs {
    let mut p = Pairs {
        n11: 0,
        n10: 0,
        n01: 0,
        n00: 0,
    };
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => p.n11 += 1,
                (true, false) => p.n10 += 1,
                (false, true) => p.n01 += 1,
                (false, false) => p.n00 += 1,
            }
        }
    }
    p
}

fn clusters(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &l) in labels.iter().enumerate() {
        map.entry(l).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = map.into_values().collect();
    out.sort();
    out
}

fn overlap(x: &[usize], y: &[usize]) -> usize {
    x.iter().filter(|e| y.binary_search(e).is_ok()).count()
}

/// Mean over clusters of `a` of the best overlap share with a cluster of `b`,
/// weighted by cluster size.
fn purity(a: &[Vec<usize>], b: &[Vec<usize>], n: usize) -> f64 {
    a.iter()
        .map(|ca| b.iter().map(|cb| overlap(ca, cb)).max().unwrap())
        .sum::<usize>() as f64
        / n as f64
}

fn entropy(c: &[Vec<usize>], n: f64) -> f64 {
    c.iter()
        .map(|x| x.len() as f64 / n)
        .map(|p| -p * p.ln())
        .sum()
}

/// Similarities in the order RI, ARI, JI, FMI, F, NMI.
pub fn oracle_similarities(a: &[usize], b: &[usize]) -> [f64; 6] {
    let n = a.len();
    let p = enumerate_pairs(a, b);
    let (n11, n10, n01, n00) = (p.n11 as f64, p.n10 as f64, p.n01 as f64, p.n00 as f64);
    let identical = p.n10 == 0 && p.n01 == 0;
    let ri = (n11 + n00) / (n11 + n10 + n01 + n00);
    let ari = if identical {
        1.0
    } else {
        2.0 * (n11 * n00 - n10 * n01) / ((n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00))
    };
    let ji = if p.n11 + p.n10 + p.n01 == 0 {
        1.0
    } else {
        n11 / (n11 + n10 + n01)
    };
    let fmi = if (p.n11 + p.n10) * (p.n11 + p.n01) == 0 {
        if identical {
            1.0
        } else {
            0.0
        }
    } else {
        n11 / ((n11 + n10) * (n11 + n01)).sqrt()
    };
    let (ca, cb) = (clusters(a), clusters(b));
    let (pa, pb) = (purity(&ca, &cb, n), purity(&cb, &ca, n));
    let f = 2.0 * pa * pb / (pa + pb);
    let nf = n as f64;
    let (ha, hb) = (entropy(&ca, nf), entropy(&cb, nf));
    let nmi = if identical || ha + hb == 0.0 {
        1.0
    } else {
        let mut mi = 0.0;
        for x in &ca {
            for y in &cb {
                let c = overlap(x, y) as f64;
                if c > 0.0 {
                    mi += c / nf * (nf * c / (x.len() as f64 * y.len() as f64)).ln();
                }
            }
        }
        2.0 * mi / (ha + hb)
    };
    [ri, ari, ji, fmi, f, nmi]
}

/// Random labels for `n` elements drawn from up to `k` raw labels.
pub fn random_labels(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}
