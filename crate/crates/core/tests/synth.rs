//! Scene statistics and ground-truth consistency of the synthetic rig.

use std::collections::BTreeMap;

use spectral_transfer::geometry::{connected_components, warp_component, BinaryMask, Component};
use spectral_transfer::imaging::{Cube, FILM, TRASH_BAG};
use spectral_transfer::spectral::pca_fit;
use spectral_transfer::synth::{
    generate_scene, is_ribbon_class, render_views, scene_seed, SceneConfig, Shape, DATASET_CLASS_COUNTS,
};

fn instance_mask(m: &spectral_transfer::LabelMask, id: u32) -> BinaryMask {
    let mut b = BinaryMask::new(m.width(), m.height());
    for y in 0..m.height() {
        for x in 0..m.width() {
            if m.instance_at(x, y) == id {
                b.set(x, y, true);
            }
        }
    }
    b
}

#[test]
fn class_mix_follows_dataset_proportions() {
    let cfg = SceneConfig::default();
    let mut counts = [0usize; 6];
    for i in 0..1000 {
        let s = generate_scene(scene_seed(2024, i), &cfg).unwrap();
        for o in &s.objects {
            counts[o.class_id as usize - 1] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    let want_total: f64 = DATASET_CLASS_COUNTS.iter().sum();
    for (c, (&n, &want)) in counts.iter().zip(&DATASET_CLASS_COUNTS).enumerate() {
        let got = n as f64 / total as f64;
        let want = want / want_total;
        assert!(
            (got / want - 1.0).abs() <= 0.2,
            "class {}: share {got:.4}, dataset share {want:.4}",
            c + 1
        );
    }
    let most = (0..6).max_by_key(|&c| counts[c]).unwrap();
    let least = (0..6).min_by_key(|&c| counts[c]).unwrap();
    assert_eq!(most, 5, "trash bag most frequent: {counts:?}");
    assert_eq!(least, 2, "cardboard least frequent: {counts:?}");
}

#[test]
fn scenes_respect_shape_invariants() {
    let cfg = SceneConfig::default();
    for i in 0..50 {
        let s = generate_scene(scene_seed(5, i), &cfg).unwrap();
        for a in s.palette.values() {
            assert!(a.spectrum.iter().all(|&v| v >= 0.0));
            assert_eq!(a.spectrum.len(), cfg.bands);
        }
        let (w, h) = s.rgb_size;
        for o in &s.objects {
            for p in o.polygon() {
                assert!(p.x >= -0.5 && p.y >= -0.5 && p.x <= w as f64 - 0.5 && p.y <= h as f64 - 0.5);
            }
            if let Shape::Ribbon { width, .. } = &o.shape {
                assert!(is_ribbon_class(o.class_id));
                assert!((1.0..=4.0).contains(width));
            }
        }
    }
}

#[test]
fn hsi_mask_is_exactly_the_warped_rgb_components() {
    let cfg = SceneConfig {
        bands: 8,
        ..SceneConfig::default()
    };
    for i in 0..8 {
        let s = generate_scene(scene_seed(77, i), &cfg).unwrap();
        let v = render_views(&s);
        let comps = connected_components(&v.gt_mask_rgb);
        for o in &s.objects {
            let px: Vec<_> = comps
                .iter()
                .filter(|c| c.instance_id == o.instance_id)
                .flat_map(|c| c.pixels.iter().copied())
                .collect();
            if px.is_empty() {
                continue;
            }
            let c = Component::from_pixels(o.class_id, o.instance_id, px);
            let warped = warp_component(&c, &v.gt_affines[&o.instance_id], s.hsi_size).unwrap();
            let gt = instance_mask(&v.gt_mask_hsi, o.instance_id);
            assert_eq!(warped.iou(&gt), 1.0, "scene {i} object {}", o.instance_id);
        }
    }
}

#[test]
fn nearest_spectrum_recovers_hsi_mask() {
    let cfg = SceneConfig {
        texture_amplitude: 0.0,
        ..SceneConfig::default()
    };
    for i in 0..3 {
        let s = generate_scene(scene_seed(31, i), &cfg).unwrap();
        let v = render_views(&s);
        let palette: Vec<(u8, &Vec<f64>)> = s.palette.iter().map(|(&c, a)| (c, &a.spectrum)).collect();
        let mut min_dist = f64::INFINITY;
        for (i, (_, a)) in palette.iter().enumerate() {
            for (_, b) in &palette[i + 1..] {
                let d = a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                min_dist = min_dist.min(d);
            }
        }
        assert!(s.noise.spectral < min_dist / 2.0, "noise {} vs distance {min_dist}", s.noise.spectral);

        let cube = &v.cube;
        let bands = cube.bands();
        let mut spec = vec![0.0; bands];
        let mut correct = 0;
        for p in 0..cube.pixel_count() {
            cube.spectrum_into(p, &mut spec);
            let class = palette
                .iter()
                .map(|(c, ref_spec)| {
                    let d: f64 = spec.iter().zip(ref_spec.iter()).map(|(x, y)| (x / 65535.0 - y).powi(2)).sum();
                    (d, *c)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap()
                .1;
            if class == v.gt_mask_hsi.class_ids()[p] {
                correct += 1;
            }
        }
        let acc = correct as f64 / cube.pixel_count() as f64;
        assert!(acc >= 0.99, "scene {i}: accuracy {acc}");
    }
}

#[test]
fn three_spectra_need_three_components() {
    let mut weights = [0.0; 6];
    weights[FILM as usize - 1] = 1.0;
    weights[TRASH_BAG as usize - 1] = 1.0;
    let cfg = SceneConfig {
        class_weights: weights,
        ribbon_probability: 0.0,
        texture_amplitude: 0.0,
        ..SceneConfig::aligned()
    };
    let s = generate_scene(3, &cfg).unwrap();
    let classes: BTreeMap<u8, ()> = s.objects.iter().map(|o| (o.class_id, ())).collect();
    assert_eq!(classes.len(), 2, "both foreground classes present");
    let v = render_views(&s);
    let cube = v.cube.to_float(65535.0);
    let bands = cube.bands();
    let mut data = vec![0.0; cube.pixel_count() * bands];
    for (p, row) in data.chunks_mut(bands).enumerate() {
        cube.spectrum_into(p, row);
    }
    let model = pca_fit(&data, bands, 3).unwrap();
    let total: f64 = model.explained_variance_ratio.iter().sum();
    assert!(total >= 0.999, "EVR {total}");
}
