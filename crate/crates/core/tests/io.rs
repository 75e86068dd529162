use cco_core::io::{format_log, format_svg, format_tree, parse_log, parse_records, parse_tree};
use cco_core::{grow, grow_with, CcoError, CcoParams, GrowOptions, PerfusionDomain, Point, VesselTree};

fn disk() -> PerfusionDomain {
    PerfusionDomain::disk(Point::new2(0.0, 0.0), 1.0).unwrap()
}

fn grown(k_term: usize) -> (CcoParams, VesselTree) {
    let params = CcoParams {
        k_term,
        seed: 5,
        ..CcoParams::default()
    };
    let tree = grow(&params, &disk(), None).unwrap();
    (params, tree)
}

#[test]
fn tree_file_round_trip_is_stable() {
    let (params, tree) = grown(50);
    let text = format_tree(&tree).unwrap();
    let back = parse_tree(&text, &params).unwrap();
    assert_eq!(format_tree(&back).unwrap(), text);
    let (a, b) = (tree.validate(&disk()).unwrap(), back.validate(&disk()).unwrap());
    assert_eq!(a.segment_count, b.segment_count);
    assert_eq!(a.terminal_count, b.terminal_count);
    assert!((a.total_volume - b.total_volume).abs() <= 1e-12 * a.total_volume);
    assert!(b.passes());
}

#[test]
fn svg_has_one_line_per_segment_with_diameter_stroke() {
    let (_, tree) = grown(2);
    let svg = format_svg(&tree, &disk()).unwrap();
    let widths: Vec<f64> = svg
        .lines()
        .filter(|l| l.trim_start().starts_with("<line"))
        .map(|l| {
            let at = l.find("stroke-width=\"").unwrap() + 14;
            l[at..].split('"').next().unwrap().parse().unwrap()
        })
        .collect();
    assert_eq!(widths.len(), 3);
    let records = parse_records(&format_tree(&tree).unwrap()).unwrap();
    for (w, r) in widths.iter().zip(&records) {
        assert_eq!(*w, 2.0 * r.radius);
    }
    assert!(svg.contains("<circle"));
}

#[test]
fn svg_rejects_3d_trees() {
    let params = CcoParams {
        k_term: 3,
        dim: 3,
        ..CcoParams::default()
    };
    let sphere = PerfusionDomain::sphere(Point::new3(0.0, 0.0, 0.0), 1.0).unwrap();
    let tree = grow(&params, &sphere, None).unwrap();
    assert!(matches!(format_svg(&tree, &sphere), Err(CcoError::Usage(_))));
}

#[test]
fn evaluation_log_round_trips() {
    let params = CcoParams {
        k_term: 20,
        seed: 1,
        ..CcoParams::default()
    };
    let mut log = Vec::new();
    grow_with(&params, &disk(), None, &GrowOptions::default(), Some(&mut log)).unwrap();
    let text = format_log(&log);
    let back = parse_log(&text).unwrap();
    assert_eq!(format_log(&back), text);
    assert_eq!(back.iter().filter(|r| r.committed).count(), 19);
}
