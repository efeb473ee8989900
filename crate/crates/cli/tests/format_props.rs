use std::path::Path;

use entsub_cli::gridfile::{format_grid, parse_grid};
use entsub_cli::instance::parse_instance;
use entsub_cli::number::parse_number;
use entsub_core::Axis;
use proptest::prelude::*;

fn family_text(n: usize, vectors: &[Vec<f64>], weights: &[f64]) -> String {
    let mut s = format!("# generated\n[family]\n{n}\n");
    for v in vectors {
        let row: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
        s += &row.join(" ");
        s += "\n";
    }
    s += "[weights]\n";
    let w: Vec<String> = weights.iter().map(|x| format!("{x:e}")).collect();
    s + &w.join("  ") + "\n"
}

proptest! {
    #[test]
    fn instances_round_trip(
        n in 1usize..5,
        rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 1..7),
        seed_w in prop::collection::vec(0.0f64..1.0, 7),
    ) {
        let vectors: Vec<Vec<f64>> = rows.iter().map(|r| r[..n].to_vec()).collect();
        let weights = seed_w[..vectors.len()].to_vec();
        let inst = parse_instance(&family_text(n, &vectors, &weights), "gen", Path::new(".")).unwrap();
        prop_assert_eq!(inst.n, n);
        prop_assert_eq!(&inst.vectors, &vectors);
        prop_assert_eq!(&inst.weights, &weights);
        prop_assert_eq!(inst.name, "gen");
    }

    #[test]
    fn products_and_quotients(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
        prop_assert_eq!(parse_number(&format!("{a:e}*{b:e}")).unwrap(), a * b);
        prop_assert_eq!(parse_number(&format!("-{a:e}/{b:e}")).unwrap(), -a / b);
        prop_assert_eq!(parse_number(&format!("sqrt({a:e})/{b:e}")).unwrap(), a.sqrt() / b);
    }

    #[test]
    fn grids_round_trip(
        lo in -20.0f64..0.0,
        width in 0.5f64..40.0,
        counts in prop::collection::vec(3usize..9, 1..4),
        seed in prop::collection::vec(-1e6f64..1e6, 512),
    ) {
        let axes: Vec<Axis> = counts.iter().map(|&c| Axis::new(lo, lo + width, c).unwrap()).collect();
        let cells: usize = counts.iter().product();
        let values = seed[..cells].to_vec();
        let back = parse_grid(&format_grid(&axes, &values)).unwrap();
        prop_assert_eq!(back.axes, axes);
        prop_assert_eq!(back.values, values);
    }
}
