//! Brute-force recomputations from a dense adjacency matrix.

use expertfind_core::BipartiteIndex;

/// `A[d][e]` as booleans, built from the document rows only.
pub fn dense_adjacency(index: &BipartiteIndex) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; index.num_authors()]; index.num_docs()];
    for (d, row) in index.doc_to_authors().iter().enumerate() {
        for &e in row {
            a[d][e] = true;
        }
    }
    a
}

/// 1-based rank by counting documents that precede `d`: strictly more
/// similar, or equally similar with a smaller index.
pub fn brute_rank(sims: &[f64], d: usize) -> usize {
    1 + (0..sims.len())
        .filter(|&o| sims[o] > sims[d] || (sims[o] == sims[d] && o < d))
        .count()
}

pub fn reciprocal_rank_scores(a: &[Vec<bool>], sims: &[f64]) -> Vec<f64> {
    let authors = a.first().map_or(0, Vec::len);
    (0..authors)
        .map(|e| {
            (0..a.len())
                .filter(|&d| a[d][e])
                .map(|d| 1.0 / brute_rank(sims, d) as f64)
                .sum()
        })
        .collect()
}

pub fn bayes_scores(a: &[Vec<bool>], sims: &[f64]) -> Vec<f64> {
    let authors = a.first().map_or(0, Vec::len);
    let prior = 1.0 / authors as f64;
    (0..authors)
        .map(|e| {
            let degree = (0..a.len()).filter(|&d| a[d][e]).count() as f64;
            let mut total = 0.0;
            for (d, row) in a.iter().enumerate() {
                if row[e] {
                    total += sims[d].max(0.0) * (1.0 / degree) * prior;
                }
            }
            total
        })
        .collect()
}

/// Author indices by descending score, ties by ascending index.
pub fn order_by_score(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&x, &y| scores[y].partial_cmp(&scores[x]).unwrap().then(x.cmp(&y)));
    order
}
