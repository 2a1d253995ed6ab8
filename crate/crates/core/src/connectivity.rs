//! 4-connected component labeling and small-fragment merging.
//!
//! Superpixels must be connected pixel sets. [`connected_components`] splits
//! every label into its 4-connected pieces; [`enforce_connectivity`] then
//! absorbs pieces below a size threshold into the neighbor they share the
//! longest border with.

use std::collections::{BTreeMap, BTreeSet};

use crate::raster::LabelMap;

/// Per-component bookkeeping used while merging fragments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentStats {
    pub component_id: usize,
    pub size: usize,
    pub original_label: u32,
    /// Neighbor component id -> number of shared 4-adjacent pixel edges.
    pub neighbor_contact: BTreeMap<usize, usize>,
}

/// Splits labels into 4-connected components numbered in raster order of
/// their first pixel. Returns the relabeled map and the component count.
pub fn connected_components(map: &LabelMap) -> (LabelMap, usize) {
    let (w, h) = map.dims();
    let src = map.labels();
    let mut out = vec![u32::MAX; src.len()];
    let mut stack = Vec::new();
    let mut next = 0u32;
    for start in 0..src.len() {
        if out[start] != u32::MAX {
            continue;
        }
        let label = src[start];
        out[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if out[j] == u32::MAX && src[j] == label {
                    out[j] = next;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        next += 1;
    }
    let count = next as usize;
    (
        LabelMap::new(w, h, out).expect("same dimensions as input"),
        count,
    )
}

/// Component statistics for a map already split by [`connected_components`].
pub fn component_stats(components: &LabelMap, original: &LabelMap, count: usize) -> Vec<ComponentStats> {
    let (w, h) = components.dims();
    let labels = components.labels();
    let mut stats: Vec<ComponentStats> = (0..count)
        .map(|id| ComponentStats {
            component_id: id,
            size: 0,
            original_label: 0,
            neighbor_contact: BTreeMap::new(),
        })
        .collect();
    for (i, &c) in labels.iter().enumerate() {
        let s = &mut stats[c as usize];
        if s.size == 0 {
            s.original_label = original.labels()[i];
        }
        s.size += 1;
    }
    let mut touch = |a: u32, b: u32| {
        if a != b {
            *stats[a as usize].neighbor_contact.entry(b as usize).or_insert(0) += 1;
            *stats[b as usize].neighbor_contact.entry(a as usize).or_insert(0) += 1;
        }
    };
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                touch(labels[i], labels[i + 1]);
            }
            if y + 1 < h {
                touch(labels[i], labels[i + w]);
            }
        }
    }
    stats
}

/// Relabels 4-connected components, then repeatedly merges the smallest
/// component below `min_size` (ties: lowest id) into the neighbor with the
/// longest shared border (ties: lowest id). Output labels are canonical.
pub fn enforce_connectivity(map: &LabelMap, min_size: usize) -> LabelMap {
    let (components, count) = connected_components(map);
    if min_size <= 1 || count <= 1 {
        return components;
    }
    let mut stats = component_stats(&components, map, count);
    // parent[c] = component c was merged into.
    let mut parent: Vec<usize> = (0..count).collect();
    let mut alive = count;
    let mut small: BTreeSet<(usize, usize)> = stats
        .iter()
        .filter(|s| s.size < min_size)
        .map(|s| (s.size, s.component_id))
        .collect();

    while let Some(&(size, id)) = small.iter().next() {
        if alive <= 1 {
            break;
        }
        small.remove(&(size, id));
        let contacts = std::mem::take(&mut stats[id].neighbor_contact);
        // Largest contact, lowest id on ties (BTreeMap iterates ascending).
        let Some((&target, _)) = contacts
            .iter()
            .fold(None::<(&usize, &usize)>, |best, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
        else {
            break;
        };

        let target_old_size = stats[target].size;
        stats[target].size += size;
        stats[target].neighbor_contact.remove(&id);
        for (&n, &len) in &contacts {
            if n == target {
                continue;
            }
            *stats[target].neighbor_contact.entry(n).or_insert(0) += len;
            let nc = &mut stats[n].neighbor_contact;
            nc.remove(&id);
            *nc.entry(target).or_insert(0) += len;
        }
        parent[id] = target;
        stats[id].size = 0;
        alive -= 1;

        if target_old_size < min_size {
            small.remove(&(target_old_size, target));
            if stats[target].size < min_size {
                small.insert((stats[target].size, target));
            }
        }
    }

    let resolve = |mut c: usize| {
        while parent[c] != c {
            c = parent[c];
        }
        c
    };
    let root: Vec<u32> = (0..count).map(|c| resolve(c) as u32).collect();
    let merged: Vec<u32> = components.labels().iter().map(|&c| root[c as usize]).collect();
    LabelMap::new(map.width(), map.height(), merged)
        .expect("same dimensions")
        .canonicalize()
}

/// Default fragment threshold used by the benchmark pipeline: a quarter of
/// the mean superpixel size.
pub fn default_min_size(width: usize, height: usize, k_desired: usize) -> usize {
    if k_desired == 0 {
        return 0;
    }
    width * height / k_desired / 4
}

/// True if every label of `map` forms a single 4-connected region.
pub fn is_connected(map: &LabelMap) -> bool {
    connected_components(map).1 == map.label_count()
}
