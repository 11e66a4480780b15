//! Independent reference implementations and fixture generators shared by the
//! integration tests (also pulled into the CLI acceptance suite).
#![allow(dead_code, clippy::needless_range_loop, clippy::manual_clamp)]

use std::cmp::Ordering;

use rand::Rng;
use roadscan_core::annot_io::DatasetManifest;
use roadscan_core::eval::GroundTruth;
use roadscan_core::numerics::{BatchNormParams, Conv2dParams, CoordAttnParams, Tensor3};
use roadscan_core::{Annotation, BBox, DamageClass, Detection, DetectionFrame, ImageRecord};

pub const IMAGES: [&str; 2] = ["img_a", "img_b"];

/// Up to `max_boxes` predictions and ground truths on a coarse integer grid with
/// few distinct confidences, so overlaps and ties are common.
pub fn fuzz_case<R: Rng>(rng: &mut R, max_boxes: usize) -> (Vec<Detection>, Vec<GroundTruth>) {
    let grid_box = |rng: &mut R| {
        let x = rng.random_range(0..16) as f64;
        let y = rng.random_range(0..16) as f64;
        let w = rng.random_range(1..8) as f64;
        let h = rng.random_range(1..8) as f64;
        BBox::new(x, y, x + w, y + h)
    };
    let n_pred = rng.random_range(0..=max_boxes);
    let n_gt = rng.random_range(0..=max_boxes);
    let preds = (0..n_pred)
        .map(|_| {
            let b = grid_box(rng);
            Detection::new(
                IMAGES[rng.random_range(0..2)],
                DamageClass::ALL[rng.random_range(0..2)],
                b,
                rng.random_range(1..=10) as f64 / 10.0,
                DetectionFrame::Original,
            )
        })
        .collect();
    let gts = (0..n_gt)
        .map(|_| {
            let b = grid_box(rng);
            GroundTruth::new(IMAGES[rng.random_range(0..2)], DamageClass::ALL[rng.random_range(0..2)], b)
        })
        .collect();
    (preds, gts)
}

/// Intersection and union areas of integer-cornered boxes, exactly.
pub fn int_overlap(a: &BBox, b: &BBox) -> (i64, i64) {
    let c = |v: f64| v as i64;
    let iw = (c(a.x_max).min(c(b.x_max)) - c(a.x_min).max(c(b.x_min))).max(0);
    let ih = (c(a.y_max).min(c(b.y_max)) - c(a.y_min).max(c(b.y_min))).max(0);
    let area = |r: &BBox| (c(r.x_max) - c(r.x_min)) * (c(r.y_max) - c(r.y_min));
    let inter = iw * ih;
    (inter, area(a) + area(b) - inter)
}

/// Score descending, then the corner coordinates, class and image.
pub fn oracle_order(a: &Detection, b: &Detection) -> Ordering {
    let key = |d: &Detection| (d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max);
    match b.confidence.partial_cmp(&a.confidence).unwrap() {
        Ordering::Equal => {}
        o => return o,
    }
    let (ka, kb) = (key(a), key(b));
    ka.partial_cmp(&kb)
        .unwrap()
        .then(a.cls.cmp(&b.cls))
        .then(a.image_id.cmp(&b.image_id))
}

/// Greedy suppression with IoU compared as an exact fraction: suppress when
/// `inter / union > num / den`.
pub fn oracle_nms(dets: &[Detection], num: i64, den: i64) -> Vec<Detection> {
    let mut pool: Vec<Detection> = dets.to_vec();
    let mut kept = Vec::new();
    while !pool.is_empty() {
        let best = (0..pool.len()).min_by(|&i, &j| oracle_order(&pool[i], &pool[j])).unwrap();
        let top = pool.remove(best);
        pool.retain(|d| {
            if d.image_id != top.image_id || d.cls != top.cls {
                return true;
            }
            let (inter, union) = int_overlap(&d.bbox, &top.bbox);
            !(union > 0 && inter * den > num * union)
        });
        kept.push(top);
    }
    kept.sort_by(oracle_order);
    kept
}

/// For each prediction in score order: `(prediction index, matched gt index)`.
/// A match needs IoU >= 1/2 (exact) and takes the highest IoU, lowest index on ties.
pub fn oracle_match(preds: &[Detection], gts: &[GroundTruth]) -> Vec<(usize, Option<usize>)> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&i, &j| oracle_order(&preds[i], &preds[j]).then(i.cmp(&j)));
    let mut taken = vec![false; gts.len()];
    order
        .into_iter()
        .map(|pi| {
            let p = &preds[pi];
            let mut best: Option<(usize, i64, i64)> = None;
            for (gi, g) in gts.iter().enumerate() {
                if taken[gi] || g.image_id != p.image_id || g.cls != p.cls {
                    continue;
                }
                let (inter, union) = int_overlap(&p.bbox, &g.bbox);
                if union == 0 || 2 * inter < union {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, bi, bu)) => inter * bu > bi * union,
                };
                if better {
                    best = Some((gi, inter, union));
                }
            }
            if let Some((gi, _, _)) = best {
                taken[gi] = true;
            }
            (pi, best.map(|b| b.0))
        })
        .collect()
}

/// All-point interpolated AP of one class from the oracle matching.
pub fn oracle_ap(preds: &[Detection], gts: &[GroundTruth], cls: DamageClass) -> f64 {
    let n_gt = gts.iter().filter(|g| g.cls == cls).count();
    if n_gt == 0 {
        return 0.0;
    }
    let p: Vec<Detection> = preds.iter().filter(|d| d.cls == cls).cloned().collect();
    let hits: Vec<bool> = oracle_match(&p, gts).into_iter().map(|(_, m)| m.is_some()).collect();
    let mut recall = vec![0.0];
    let mut precision = vec![1.0];
    let mut tp = 0.0;
    for (i, hit) in hits.iter().enumerate() {
        if *hit {
            tp += 1.0;
        }
        recall.push(tp / n_gt as f64);
        precision.push(tp / (i + 1) as f64);
    }
    let mut ap = 0.0;
    for i in 1..recall.len() {
        let envelope = precision[i..].iter().cloned().fold(0.0, f64::max);
        ap += (recall[i] - recall[i - 1]) * envelope;
    }
    ap
}

fn bn_apply(bn: &BatchNormParams, ch: usize, v: f64) -> f64 {
    (v - bn.running_mean[ch]) / (bn.running_var[ch] + bn.eps).sqrt() * bn.gamma[ch] + bn.beta[ch]
}

/// `[c_out][c_in][k][k]` weight lookup, written out without the library helper.
fn w(p: &Conv2dParams, o: usize, i: usize, ky: usize, kx: usize) -> f64 {
    p.weights[o * p.c_in * p.k * p.k + i * p.k * p.k + ky * p.k + kx]
}

/// Coordinate attention as explicit loops over every index.
pub fn oracle_coord_attention(x: &Tensor3, p: &CoordAttnParams) -> Tensor3 {
    let (c, h, wd) = (x.c, x.h, x.w);
    let m = p.conv1.c_out;
    let v = |ch: usize, i: usize, j: usize| x.data[ch * h * wd + i * wd + j];
    let hswish = |t: f64| t * (t + 3.0).max(0.0).min(6.0) / 6.0;
    let sig = |t: f64| 1.0 / (1.0 + (-t).exp());

    let mut z_h = vec![vec![0.0; h]; c];
    let mut z_w = vec![vec![0.0; wd]; c];
    for ch in 0..c {
        for i in 0..h {
            let mut s = 0.0;
            for j in 0..wd {
                s += v(ch, i, j);
            }
            z_h[ch][i] = s / wd as f64;
        }
        for j in 0..wd {
            let mut s = 0.0;
            for i in 0..h {
                s += v(ch, i, j);
            }
            z_w[ch][j] = s / h as f64;
        }
    }
    let shared = |z: &Vec<Vec<f64>>, len: usize| {
        let mut f = vec![vec![0.0; len]; m];
        for o in 0..m {
            for t in 0..len {
                let mut s = p.conv1.bias[o];
                for ch in 0..c {
                    s += w(&p.conv1, o, ch, 0, 0) * z[ch][t];
                }
                f[o][t] = hswish(bn_apply(&p.bn, o, s));
            }
        }
        f
    };
    let (f_h, f_w) = (shared(&z_h, h), shared(&z_w, wd));
    let gate = |conv: &Conv2dParams, f: &Vec<Vec<f64>>, len: usize| {
        let mut g = vec![vec![0.0; len]; c];
        for ch in 0..c {
            for t in 0..len {
                let mut s = conv.bias[ch];
                for o in 0..m {
                    s += w(conv, ch, o, 0, 0) * f[o][t];
                }
                g[ch][t] = sig(s);
            }
        }
        g
    };
    let (g_h, g_w) = (gate(&p.conv_h, &f_h, h), gate(&p.conv_w, &f_w, wd));
    let mut out = vec![0.0; c * h * wd];
    for ch in 0..c {
        for i in 0..h {
            for j in 0..wd {
                out[ch * h * wd + i * wd + j] = v(ch, i, j) * g_h[ch][i] * g_w[ch][j];
            }
        }
    }
    Tensor3::from_vec(c, h, wd, out).unwrap()
}

/// Convolution followed by batch norm, as explicit loops with bounds checks in
/// place of padding.
pub fn oracle_conv_bn(x: &Tensor3, conv: &Conv2dParams, bn: &BatchNormParams) -> Tensor3 {
    let (k, s, pad) = (conv.k as i64, conv.stride as i64, conv.padding as i64);
    let (h, wd) = (x.h as i64, x.w as i64);
    let oh = (h + 2 * pad - k) / s + 1;
    let ow = (wd + 2 * pad - k) / s + 1;
    let mut out = vec![0.0; conv.c_out * (oh * ow) as usize];
    for o in 0..conv.c_out {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = conv.bias[o];
                for i in 0..conv.c_in {
                    for ky in 0..k {
                        for kx in 0..k {
                            let (iy, ix) = (oy * s + ky - pad, ox * s + kx - pad);
                            if iy >= 0 && iy < h && ix >= 0 && ix < wd {
                                acc += w(conv, o, i, ky as usize, kx as usize)
                                    * x.data[i * (h * wd) as usize + (iy * wd + ix) as usize];
                            }
                        }
                    }
                }
                out[o * (oh * ow) as usize + (oy * ow + ox) as usize] = bn_apply(bn, o, acc);
            }
        }
    }
    Tensor3::from_vec(conv.c_out, oh as usize, ow as usize, out).unwrap()
}

/// Mixed manifest: normal images of a few common sizes, large 4040x2041 images
/// and one boundary-sized 1824x1824 image, ids in shuffled-looking order.
pub fn synthetic_manifest(normal: usize, large: usize) -> DatasetManifest {
    let sizes = [(600, 600), (640, 640), (720, 720), (1280, 720), (1824, 1824)];
    let mut images = Vec::new();
    for i in 0..normal {
        let (w, h) = sizes[i % sizes.len()];
        images.push(ImageRecord::new(format!("Japan_{:06}", (i * 7919) % 100_003), "Japan", w, h));
    }
    for i in 0..large {
        images.push(
            ImageRecord::new(format!("Norway_{:06}", (i * 104_729) % 100_003), "Norway", 4040, 2041)
                .with_annotations(vec![Annotation::new(DamageClass::D00, BBox::new(10.0, 300.0, 90.0, 400.0))]),
        );
    }
    DatasetManifest::new(images)
}
