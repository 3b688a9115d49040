//! 4-connected component labeling of boolean masks (two-pass union-find).

/// Component labels for a `width × height` mask. `labels[i]` is `0` for
/// background and `1..=sizes.len()` otherwise; labels are numbered in
/// row-major order of each component's first pixel.
#[derive(Debug, Clone)]
pub struct Components {
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let next = self.parent[x as usize];
            self.parent[x as usize] = self.parent[next as usize];
            x = next;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

pub fn label_components(mask: &[bool], width: usize, height: usize) -> Components {
    assert_eq!(mask.len(), width * height, "mask size does not match dimensions");
    let mut provisional = vec![0u32; mask.len()];
    let mut set = DisjointSet { parent: vec![0] };

    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            if !mask[i] {
                continue;
            }
            let up = if r > 0 { provisional[i - width] } else { 0 };
            let left = if c > 0 { provisional[i - 1] } else { 0 };
            provisional[i] = match (up, left) {
                (0, 0) => {
                    let id = set.parent.len() as u32;
                    set.parent.push(id);
                    id
                }
                (a, 0) | (0, a) => a,
                (a, b) => {
                    set.union(a, b);
                    a.min(b)
                }
            };
        }
    }

    // Second pass: compact root ids into consecutive labels in scan order.
    let mut compact = vec![0u32; set.parent.len()];
    let mut sizes = Vec::new();
    let mut labels = vec![0u32; mask.len()];
    for i in 0..mask.len() {
        let p = provisional[i];
        if p == 0 {
            continue;
        }
        let root = set.find(p) as usize;
        if compact[root] == 0 {
            sizes.push(0);
            compact[root] = sizes.len() as u32;
        }
        let label = compact[root];
        labels[i] = label;
        sizes[label as usize - 1] += 1;
    }
    Components { labels, sizes }
}

/// Removes 4-connected components smaller than `min_size` pixels.
pub fn sieve(mask: &[bool], width: usize, height: usize, min_size: usize) -> Vec<bool> {
    if min_size <= 1 {
        return mask.to_vec();
    }
    let comps = label_components(mask, width, height);
    comps
        .labels
        .iter()
        .map(|&l| l != 0 && comps.sizes[l as usize - 1] >= min_size)
        .collect()
}
