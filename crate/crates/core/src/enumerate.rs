//! Odometer-style enumeration of finite function spaces.

/// Iterates over every function `{0..dom} -> {0..cod}` as a table, in
/// lexicographic order. The empty domain yields the single empty function.
#[derive(Debug, Clone)]
pub struct Functions {
    cod: usize,
    current: Option<Vec<usize>>,
}

impl Functions {
    pub fn new(dom: usize, cod: usize) -> Self {
        let current = if dom > 0 && cod == 0 { None } else { Some(vec![0; dom]) };
        Functions { cod, current }
    }
}

impl Iterator for Functions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.cod {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

/// Iterates over all tuples `(x_0, .., x_{n-1})` with `x_i < bounds[i]`.
#[derive(Debug, Clone)]
pub struct Product {
    bounds: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl Product {
    pub fn new(bounds: Vec<usize>) -> Self {
        let current = if bounds.contains(&0) { None } else { Some(vec![0; bounds.len()]) };
        Product { bounds, current }
    }
}

impl Iterator for Product {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.bounds[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

/// All functions `dom -> cod` that are surjective.
pub fn surjections(dom: usize, cod: usize) -> impl Iterator<Item = Vec<usize>> {
    Functions::new(dom, cod).filter(move |t| {
        let mut hit = vec![false; cod];
        for &v in t {
            hit[v] = true;
        }
        hit.into_iter().all(|h| h)
    })
}

/// All set partitions of `{0..n}`, each given as a block index per element
/// (restricted growth strings).
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur.push(b);
            go(i + 1, n, cur, if b == max { max + 1 } else { max }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Permutations of `{0..n}` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    Functions::new(n, n)
        .filter(|t| {
            let mut seen = vec![false; n];
            t.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(Functions::new(3, 2).count(), 8);
        assert_eq!(Functions::new(0, 0).count(), 1);
        assert_eq!(Functions::new(2, 0).count(), 0);
        assert_eq!(surjections(3, 2).count(), 6);
        assert_eq!(partitions(3).len(), 5);
        assert_eq!(partitions(0).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(Product::new(vec![2, 3]).count(), 6);
        assert_eq!(Product::new(vec![]).count(), 1);
    }
}
