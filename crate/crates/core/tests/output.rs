use nsch_vem::diagnostics::ErrorSet;
use nsch_vem::mesh::{generate_mesh, read_mesh_str, write_mesh_string, MeshFamily, Rect};
use nsch_vem::output::{errors_csv, rates, ErrorRow, ERRORS_HEADER};
use proptest::prelude::*;

fn row(family: MeshFamily, n: u32, c: [f64; 3], p: [f64; 3]) -> ErrorRow {
    let h = 1.0 / n as f64;
    ErrorRow {
        family,
        h,
        k: 1,
        l: 2,
        tau: 0.1 * h,
        errors: ErrorSet {
            err_u_h1: c[0] * h.powf(p[0]),
            err_p_l2: c[1] * h.powf(p[1]),
            err_phi_h2: c[2] * h.powf(p[2]),
            absolute: [false; 3],
        },
    }
}

fn family() -> impl Strategy<Value = MeshFamily> {
    prop_oneof![
        Just(MeshFamily::Triangular),
        Just(MeshFamily::Quadrilateral),
        Just(MeshFamily::Cartesian),
        Just(MeshFamily::Voronoi)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rates_recover_power_laws(c in prop::array::uniform3(0.1..10.0f64), p in prop::array::uniform3(0.5..4.0f64), n in 2u32..20) {
        let r = rates(&row(MeshFamily::Cartesian, n, c, p), &row(MeshFamily::Cartesian, 2 * n, c, p)).unwrap();
        for i in 0..3 {
            prop_assert!((r[i] - p[i]).abs() < 1e-10);
        }
        prop_assert!(rates(&row(MeshFamily::Cartesian, n, c, p), &row(MeshFamily::Voronoi, 2 * n, c, p)).is_none());
        prop_assert!(rates(&row(MeshFamily::Cartesian, 2 * n, c, p), &row(MeshFamily::Cartesian, n, c, p)).is_none());
    }

    #[test]
    fn errors_csv_round_trips_values(c in prop::array::uniform3(1e-8..10.0f64), p in prop::array::uniform3(0.5..4.0f64)) {
        let rows: Vec<ErrorRow> = [4, 8, 16].iter().map(|&n| row(MeshFamily::Triangular, n, c, p))
            .chain([4, 8].iter().map(|&n| row(MeshFamily::Voronoi, n, c, p)))
            .collect();
        let text = errors_csv(&rows).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        prop_assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), ERRORS_HEADER.to_vec());
        let recs: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        prop_assert_eq!(recs.len(), rows.len());
        for (rec, row) in recs.iter().zip(&rows) {
            prop_assert_eq!(rec[0].to_string(), row.family.to_string());
            prop_assert_eq!(rec[5].parse::<f64>().unwrap(), row.errors.err_u_h1);
            prop_assert_eq!(rec[7].parse::<f64>().unwrap(), row.errors.err_phi_h2);
        }
        prop_assert!(recs[0][8].is_empty() && recs[3][8].is_empty());
        prop_assert!((recs[4][10].parse::<f64>().unwrap() - p[2]).abs() < 1e-10);
    }

    #[test]
    fn mesh_text_round_trips(family in family(), n in 2usize..7, x0 in -1.0..1.0f64, w in 0.5..3.0f64) {
        let domain = Rect::new(x0, x0 + w, 0.0, 1.0);
        let mesh = generate_mesh(family, n, domain).unwrap();
        prop_assert!((mesh.total_area() - w).abs() < 1e-12 * w);
        let text = write_mesh_string(&mesh);
        let back = read_mesh_str(&text).unwrap();
        prop_assert_eq!(write_mesh_string(&back), text);
        prop_assert_eq!(back.vertices(), mesh.vertices());
        prop_assert_eq!(back.cells(), mesh.cells());
    }
}
