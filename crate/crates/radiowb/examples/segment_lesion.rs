//! Seeded region growing inside a drawn curve, in 2-D and spread across
//! slices, followed by conversion of the grown mask back to polygons.

use radiowb_core::segmentation::{fit_boundary, mask_to_roi, CancelToken, GrowRequest, Polarity};
use radiowb_core::{Mask, RoiPolygon, SlicePolygon, Volume};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inside = |x: usize, y: usize, z: usize| {
        (x as f64 - 30.0).powi(2) + (y as f64 - 28.0).powi(2) + ((z as f64 - 6.0) * 2.5).powi(2) <= 144.0
    };
    let vol = Volume::from_fn([64, 64, 13], [0.7, 0.7, 1.75], |x, y, z| {
        let speckle = ((x * 13 + y * 7 + z * 3) % 9) as f64 - 4.0;
        let level = if inside(x, y, z) { 90.0 } else { 15.0 };
        level + speckle
    })?;
    let truth = Mask::from_fn(vol.dims(), inside);
    let curve = RoiPolygon::new(
        "curve",
        "ct",
        vec![SlicePolygon { z: 6, vertices: vec![[14.5, 12.5], [46.5, 12.5], [46.5, 44.5], [14.5, 44.5]] }],
    );

    for spread_3d in [false, true] {
        let mut req = GrowRequest::new(curve.clone(), Polarity::Bright);
        req.spread_3d = spread_3d;
        let grown = fit_boundary(&vol, &req, &CancelToken::new())?;
        println!(
            "spread_3d={spread_3d}: {} voxels on slices {:?}, dice vs sphere {:.3}",
            grown.mask.voxel_count(),
            grown.mask.occupied_slices(),
            grown.mask.dice(&truth)
        );
        if spread_3d {
            let roi = mask_to_roi(&grown.mask, "grown", "ct")?;
            println!("as polygons: {} slices, first has {} vertices", roi.slices.len(), roi.slices[0].vertices.len());
        }
    }
    Ok(())
}
