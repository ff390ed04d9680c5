use std::cmp::Ordering;

/// Exponent vector of a monomial.
///
/// Ordered graded-lexicographically: total degree first, then the first
/// variable dominates, so with variables `(x, y)` the degree-one monomials
/// sort as `x < y` and iteration visits `1, x, y, x², xy, y², …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    /// `x_idx` in `nvars` variables.
    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors in `nvars` variables of total degree exactly `deg`,
/// in [`Monomial`] order.
pub fn exponents_of_degree(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=deg).rev() {
            prefix.push(e);
            rec(nvars, deg - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, deg, &mut Vec::new(), &mut out);
    out
}

/// All exponent vectors of total degree `≤ max_deg`, in [`Monomial`] order.
pub fn exponents_up_to(nvars: usize, max_deg: u32) -> Vec<Vec<u32>> {
    (0..=max_deg)
        .flat_map(|d| exponents_of_degree(nvars, d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order() {
        let mut v: Vec<Monomial> = exponents_up_to(2, 2).into_iter().map(Monomial::new).collect();
        let sorted = {
            let mut s = v.clone();
            s.sort();
            s
        };
        assert_eq!(v, sorted);
        v.dedup();
        let exps: Vec<_> = v.iter().map(|m| m.exps().to_vec()).collect();
        assert_eq!(
            exps,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn multiplicative() {
        let a = Monomial::new(vec![1, 0]);
        let b = Monomial::new(vec![0, 1]);
        let c = Monomial::new(vec![2, 3]);
        assert!(a < b);
        assert!(a.mul(&c) < b.mul(&c));
        assert!(a.divides(&c));
        assert_eq!(a.quotient_of(&c), Monomial::new(vec![1, 3]));
    }

    #[test]
    fn counts() {
        assert_eq!(exponents_of_degree(3, 2).len(), 6);
        assert_eq!(exponents_up_to(0, 3), vec![Vec::<u32>::new()]);
    }
}
