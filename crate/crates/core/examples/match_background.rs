//! Builds a library of textured backgrounds and identifies which one sits
//! behind a scene with a person-shaped sprite in front of it.

use semtx::bglib::{best_match, build_entry, BackgroundLibrary, DEFAULT_N_MIN};
use semtx::features::{extract_masked, FeatureParams, DEFAULT_HAMMING_THRESHOLD};
use semtx::synth;

fn main() -> semtx::Result<()> {
    let params = FeatureParams::default();
    let mut lib = BackgroundLibrary::new();
    for id in 0..6 {
        lib.push(build_entry(id, synth::texture(160, 120, 40 + id as u64), None, params)?)?;
    }

    let truth = 4;
    let scene = synth::random_scene(&lib.get(truth).unwrap().image, 36, 56, 7);
    let (keypoints, query) = extract_masked(&scene.image, Some(&scene.person_mask), params)?;
    println!("query: {} keypoints outside the person mask", keypoints.len());

    let outcome = best_match(&query, &lib, DEFAULT_HAMMING_THRESHOLD, DEFAULT_N_MIN);
    for (id, n) in &outcome.counts {
        let tag = if Some(*id) == outcome.background_id {
            "  <- best"
        } else {
            ""
        };
        println!("  entry {id}: {n:4} matches{tag}");
    }
    println!("matched = {}, expected entry {truth}", outcome.matched);
    Ok(())
}
