use hdqf_bench::experiments::{codebook, image_decode, noise, non_unique, prob_vs_iter, scaling, table1};
use hdqf_bench::images::{glyphs, load_images, BinaryImage};
use hdqf_bench::output::Artifacts;
use hdqf_core::hdqf::Mode;

fn small_runs() -> Vec<(&'static str, Artifacts)> {
    vec![
        (
            "prob-vs-iter",
            prob_vs_iter::run(&prob_vs_iter::Params {
                factors: vec![2],
                sizes: vec![2, 4],
                dim: 4,
                seed: 3,
                ..Default::default()
            })
            .unwrap()
            .artifacts(),
        ),
        (
            "scaling",
            scaling::run(&scaling::Params {
                factors: vec![2],
                sizes: vec![2, 3, 4],
                dim: 8,
                classical_trials: 20,
                ..Default::default()
            })
            .unwrap()
            .artifacts(),
        ),
        (
            "noise",
            noise::run(&noise::Params {
                sizes: vec![2],
                dim: 2,
                t1_points: 3,
                max_iterations: 2,
                trials: 4,
                shots: 10,
                reference_trials: 50,
                ..Default::default()
            })
            .unwrap()
            .artifacts(),
        ),
        (
            "non-unique",
            non_unique::run(&non_unique::Params {
                factors: 2,
                size: 4,
                dim: 3,
                max_iterations: 6,
                runs: 16,
                repeats: 2,
                ..Default::default()
            })
            .unwrap()
            .artifacts(),
        ),
        (
            "table1",
            table1::run(&table1::Params { rows: vec![(25, 3, 5)], trials: 20, max_iters: 200, ..Default::default() })
                .unwrap()
                .artifacts(),
        ),
        ("gen-codebook", codebook::artifacts(&codebook::Params::default()).unwrap()),
        (
            "image-decode",
            image_decode::run(&image_decode::Params {
                glyphs: 2,
                glyph_size: 12,
                locations: 2,
                mode: Mode::Implicit,
                high_dim: 64,
                verdict_seeds: 2,
                ..Default::default()
            })
            .unwrap()
            .artifacts(),
        ),
    ]
}

#[test]
fn artifacts_are_deterministic_and_well_formed() {
    let (a, b) = (small_runs(), small_runs());
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        assert_eq!(x.names(), y.names(), "{name}");
        assert!(x.names().contains(&"manifest.txt"), "{name} has no manifest");
        for file in x.names() {
            let bytes = x.get(file).unwrap();
            assert_eq!(bytes, y.get(file).unwrap(), "{name}/{file} differs between runs");
            if file.ends_with(".csv") {
                let mut r = csv::Reader::from_reader(bytes);
                let header = r.headers().unwrap().clone();
                assert!(header.iter().any(|h| h == "seed"), "{name}/{file} header lacks a seed column");
                for row in r.records() {
                    assert_eq!(row.unwrap().len(), header.len(), "{name}/{file}");
                }
            }
            if file.ends_with(".svg") {
                let text = std::str::from_utf8(bytes).unwrap();
                let doc = roxmltree::Document::parse(text).unwrap_or_else(|e| panic!("{name}/{file}: {e}"));
                assert_eq!(doc.root_element().tag_name().name(), "svg");
            }
        }
    }
}

#[test]
fn written_images_load_back() {
    let run = image_decode::run(&image_decode::Params {
        glyphs: 2,
        glyph_size: 12,
        locations: 2,
        mode: Mode::Implicit,
        high_dim: 64,
        verdict_seeds: 1,
        ..Default::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    run.artifacts().write_all(dir.path()).unwrap();
    let originals: Vec<BinaryImage> =
        ["original_0.pbm", "original_1.pbm"].iter().map(|f| BinaryImage::load(&dir.path().join(f)).unwrap()).collect();
    assert_eq!(originals, glyphs(2, 12));
    assert!(load_images(dir.path()).unwrap().len() >= 2 * 5);
}

#[test]
fn pbm_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let imgs = glyphs(6, 48);
    for (i, g) in imgs.iter().enumerate() {
        g.save(&dir.path().join(format!("g{i}.pbm"))).unwrap();
    }
    assert_eq!(load_images(dir.path()).unwrap(), imgs);
}
