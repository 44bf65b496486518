use super::{Cluster, Witness};

/// `0.05 * diameter`, floored at `1e-6`.
pub fn default_cluster_eps(values: &[Vec<f64>]) -> f64 {
    let mut diam: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            diam = diam.max(dist(a, b));
        }
    }
    (0.05 * diam).max(1e-6)
}

/// Groups of indices linked by chains of steps no longer than `eps`.
/// Groups are sorted internally and ordered by their smallest index.
pub fn single_linkage(values: &[Vec<f64>], eps: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist(&values[i], &values[j]) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

pub(crate) fn build_clusters(witnesses: Vec<Witness>, eps: f64) -> Vec<Cluster> {
    let values: Vec<Vec<f64>> = witnesses.iter().map(|w| w.value.clone()).collect();
    let groups = single_linkage(&values, eps);
    let mut slots: Vec<Option<Witness>> = witnesses.into_iter().map(Some).collect();
    groups
        .into_iter()
        .map(|g| {
            let members: Vec<Witness> = g.iter().map(|&i| slots[i].take().expect("each index once")).collect();
            let k = members[0].value.len();
            let mut center = vec![0.0; k];
            for w in &members {
                center.iter_mut().zip(&w.value).for_each(|(c, v)| *c += v);
            }
            center.iter_mut().for_each(|c| *c /= members.len() as f64);
            let radius = members.iter().map(|w| dist(&center, &w.value)).fold(0.0, f64::max);
            Cluster { center, radius, support: members.len(), witnesses: members }
        })
        .collect()
}

/// Split clusters into those holding a witness from every scale in
/// `required` and the rest.
pub(crate) fn persistent(clusters: Vec<Cluster>, required: &[f64]) -> (Vec<Cluster>, usize) {
    let total = clusters.len();
    let kept: Vec<Cluster> =
        clusters.into_iter().filter(|c| required.iter().all(|s| c.witnesses.iter().any(|w| w.scale == *s))).collect();
    let dropped = total - kept.len();
    (kept, dropped)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
