use std::collections::HashMap;

use crate::manifold::{zw_vars, GenericManifold, ManifoldOptions};
use crate::parse::{parse_polynomial, Origin};

pub fn build_with(n: usize, defining: &[&str], cap: u32, opts: &ManifoldOptions) -> crate::error::Result<GenericManifold> {
    let zw = zw_vars(n);
    let mut tokens: HashMap<String, usize> = HashMap::new();
    for k in 0..n {
        tokens.insert(format!("z{}", k + 1), k);
        tokens.insert(format!("zb{}", k + 1), n + k);
    }
    let rho = defining
        .iter()
        .map(|d| parse_polynomial(d, &zw, &tokens, Origin::default()))
        .collect::<crate::error::Result<Vec<_>>>()?;
    GenericManifold::from_defining(rho, n, defining.len(), cap, Vec::new(), opts)
}

pub fn build(n: usize, defining: &[&str], cap: u32) -> GenericManifold {
    build_with(n, defining, cap, &ManifoldOptions::default()).unwrap()
}

pub fn lewy(cap: u32) -> GenericManifold {
    build(2, &["(z2 - zb2)/(2*i) - z1*zb1"], cap)
}

pub fn leviflat(cap: u32) -> GenericManifold {
    build(2, &["(z2 - zb2)/(2*i)"], cap)
}

pub fn quartic(cap: u32) -> GenericManifold {
    build(2, &["(z2 - zb2)/(2*i) - z1^2*zb1^2"], cap)
}

pub fn cylinder(cap: u32) -> GenericManifold {
    build(3, &["(z3 - zb3)/(2*i) - z1*zb1"], cap)
}
