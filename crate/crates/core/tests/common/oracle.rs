//! Brute-force reference metrics. Every quantity is recomputed from raw
//! pixel scans (pairwise intersections, exhaustive nearest-boundary search)
//! so no code path is shared with the library beyond the raster accessors.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use spix_core::{Image, LabelMap};

pub fn distinct(m: &LabelMap) -> Vec<u32> {
    m.labels().iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}

fn count_where(m: &LabelMap, f: impl Fn(usize) -> bool) -> usize {
    (0..m.len()).filter(|&i| f(i)).count()
}

fn size(m: &LabelMap, label: u32) -> usize {
    count_where(m, |i| m.labels()[i] == label)
}

fn inter(gt: &LabelMap, g: u32, sp: &LabelMap, s: u32) -> usize {
    count_where(gt, |i| gt.labels()[i] == g && sp.labels()[i] == s)
}

pub fn is_boundary(m: &LabelMap, x: usize, y: usize) -> bool {
    let (w, h) = m.dims();
    let here = m.get(x, y);
    let mut neighbors = Vec::new();
    if x > 0 {
        neighbors.push((x - 1, y));
    }
    if x + 1 < w {
        neighbors.push((x + 1, y));
    }
    if y > 0 {
        neighbors.push((x, y - 1));
    }
    if y + 1 < h {
        neighbors.push((x, y + 1));
    }
    neighbors.into_iter().any(|(a, b)| m.get(a, b) != here)
}

fn boundary_points(m: &LabelMap) -> Vec<(usize, usize)> {
    let (w, h) = m.dims();
    let mut pts = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if is_boundary(m, x, y) {
                pts.push((x, y));
            }
        }
    }
    pts
}

pub fn recall(gt: &LabelMap, sp: &LabelMap, r: usize) -> f64 {
    let g = boundary_points(gt);
    if g.is_empty() {
        return 1.0;
    }
    let s = boundary_points(sp);
    let hit = g
        .iter()
        .filter(|&&(x, y)| s.iter().any(|&(a, b)| x.abs_diff(a) <= r && y.abs_diff(b) <= r))
        .count();
    hit as f64 / g.len() as f64
}

pub fn ue_np(gt: &LabelMap, sp: &LabelMap) -> f64 {
    let mut total = 0usize;
    for g in distinct(gt) {
        for s in distinct(sp) {
            let both = inter(gt, g, sp, s);
            if both > 0 {
                total += both.min(size(sp, s) - both);
            }
        }
    }
    total as f64 / gt.len() as f64
}

pub fn ue_levin(gt: &LabelMap, sp: &LabelMap) -> f64 {
    let gs = distinct(gt);
    let mut total = 0.0;
    for &g in &gs {
        let covered: usize = distinct(sp)
            .into_iter()
            .filter(|&s| inter(gt, g, sp, s) > 0)
            .map(|s| size(sp, s))
            .sum();
        let gsize = size(gt, g);
        total += (covered - gsize) as f64 / gsize as f64;
    }
    total / gs.len() as f64
}

/// Largest overlap per superpixel, ties toward the lowest ground-truth label.
fn best_overlap(gt: &LabelMap, sp: &LabelMap, s: u32) -> usize {
    let mut best: Option<(usize, u32)> = None;
    for g in distinct(gt) {
        let v = inter(gt, g, sp, s);
        if best.is_none_or(|(bv, _)| v > bv) {
            best = Some((v, g));
        }
    }
    best.map_or(0, |(v, _)| v)
}

pub fn ue_bergh(gt: &LabelMap, sp: &LabelMap) -> f64 {
    let total: usize = distinct(sp)
        .into_iter()
        .map(|s| size(sp, s) - best_overlap(gt, sp, s))
        .sum();
    total as f64 / gt.len() as f64
}

pub fn asa(gt: &LabelMap, sp: &LabelMap) -> f64 {
    let total: usize = distinct(sp).into_iter().map(|s| best_overlap(gt, sp, s)).sum();
    total as f64 / gt.len() as f64
}

fn channel_values(image: &Image, i: usize) -> Vec<f64> {
    let c = image.channels();
    image.data()[i * c..(i + 1) * c].iter().map(|&v| v as f64).collect()
}

fn mean_of(image: &Image, members: &[usize]) -> Vec<f64> {
    let mut acc = vec![0.0; image.channels()];
    for &i in members {
        for (a, v) in acc.iter_mut().zip(channel_values(image, i)) {
            *a += v;
        }
    }
    acc.iter().map(|a| a / members.len() as f64).collect()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn members(sp: &LabelMap, s: u32) -> Vec<usize> {
    (0..sp.len()).filter(|&i| sp.labels()[i] == s).collect()
}

pub fn ev(image: &Image, sp: &LabelMap) -> f64 {
    let all: Vec<usize> = (0..sp.len()).collect();
    let mu = mean_of(image, &all);
    let denom: f64 = all.iter().map(|&i| sq(&channel_values(image, i), &mu)).sum();
    if denom == 0.0 {
        return 1.0;
    }
    let numer: f64 = distinct(sp)
        .into_iter()
        .map(|s| {
            let m = members(sp, s);
            m.len() as f64 * sq(&mean_of(image, &m), &mu)
        })
        .sum();
    numer / denom
}

pub fn co(sp: &LabelMap) -> f64 {
    let (w, h) = sp.dims();
    let mut total = 0.0;
    for s in distinct(sp) {
        let mut area = 0usize;
        let mut perimeter = 0usize;
        for y in 0..h {
            for x in 0..w {
                if sp.get(x, y) != s {
                    continue;
                }
                area += 1;
                let outside_or_other = |nx: isize, ny: isize| {
                    nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize || sp.get(nx as usize, ny as usize) != s
                };
                let (xi, yi) = (x as isize, y as isize);
                for (nx, ny) in [(xi - 1, yi), (xi + 1, yi), (xi, yi - 1), (xi, yi + 1)] {
                    if outside_or_other(nx, ny) {
                        perimeter += 1;
                    }
                }
            }
        }
        let q = (4.0 * std::f64::consts::PI * area as f64 / (perimeter * perimeter) as f64).min(1.0);
        total += area as f64 * q;
    }
    total / sp.len() as f64
}

pub fn icv(image: &Image, sp: &LabelMap) -> f64 {
    let labels = distinct(sp);
    let total: f64 = labels
        .iter()
        .map(|&s| {
            let m = members(sp, s);
            let mu = mean_of(image, &m);
            let spread: f64 = m.iter().map(|&i| sq(&channel_values(image, i), &mu)).sum();
            spread.sqrt() / m.len() as f64
        })
        .sum();
    total / labels.len() as f64
}

pub fn mde(gt: &LabelMap, sp: &LabelMap) -> f64 {
    let (w, h) = gt.dims();
    let g = boundary_points(gt);
    let s = boundary_points(sp);
    let fallback = (((w - 1) * (w - 1) + (h - 1) * (h - 1)) as f64).sqrt();
    let total: f64 = g
        .iter()
        .map(|&(x, y)| {
            s.iter()
                .map(|&(a, b)| {
                    let (dx, dy) = (x as f64 - a as f64, y as f64 - b as f64);
                    (dx * dx + dy * dy).sqrt()
                })
                .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))))
                .unwrap_or(fallback)
        })
        .sum();
    total / gt.len() as f64
}

/// 4-connected component id per pixel, by breadth-first flood fill.
pub fn flood_components(m: &LabelMap) -> (Vec<usize>, usize) {
    let (w, h) = m.dims();
    let mut comp = vec![usize::MAX; m.len()];
    let mut next = 0;
    for start in 0..m.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let label = m.labels()[start];
        comp[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            let mut nb = Vec::with_capacity(4);
            if x > 0 {
                nb.push(i - 1);
            }
            if x + 1 < w {
                nb.push(i + 1);
            }
            if y > 0 {
                nb.push(i - w);
            }
            if y + 1 < h {
                nb.push(i + w);
            }
            for j in nb {
                if comp[j] == usize::MAX && m.labels()[j] == label {
                    comp[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    (comp, next)
}

/// Every label forms exactly one 4-connected component.
pub fn every_label_connected(m: &LabelMap) -> bool {
    let (_, components) = flood_components(m);
    components == distinct(m).len()
}

/// Same pixel-pair co-membership, checked through a label bijection.
pub fn same_partition<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut fwd: BTreeMap<A, B> = BTreeMap::new();
    let mut back: BTreeMap<B, A> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}
