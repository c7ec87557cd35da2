pub mod linalg;
pub mod logspace;
pub mod quad;

pub use linalg::{det, log_det};
pub use logspace::{ln_binomial, ln_factorial, ln_factorial_signed, LogValue};
pub use quad::Rule;

/// All increasing `k`-subsets of `{0, .., m-1}` in lexicographic order.
pub fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + m - k) else {
            return out;
        };
        idx[pos] += 1;
        for j in (pos + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn subsets_are_counted_by_binomials() {
        assert_eq!(super::k_subsets(6, 3).len(), 20);
        assert_eq!(super::k_subsets(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(super::k_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(super::k_subsets(2, 3).is_empty());
    }
}
