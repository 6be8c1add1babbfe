mod common;

use common::fixture;
use proptest::prelude::*;
use sbfem_seepage::geometry::Point2;
use sbfem_seepage::io::{deck_to_model, parse_inp, parse_native_model, parse_overlay, serialize_native_model};
use sbfem_seepage::mesh::{validate_mesh, PolygonMesh};
use sbfem_seepage::model::{
    EdgeTarget, FluxSet, InitialHead, Material, Monitor, NodeTarget, Schedule, SeepageModel, TransientSettings,
};
use sbfem_seepage::solver::Simulation;
use sbfem_seepage::Error;

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

#[test]
fn listing_deck_golden() {
    let deck = parse_inp(&read("listing1.inp")).unwrap();
    assert_eq!(deck.elements.len(), 1);
    let e = &deck.elements[0];
    assert_eq!((e.id, e.type_name.as_str(), e.elset.as_deref()), (3, "U5", Some("E5")));
    assert_eq!(e.nodes, vec![2, 3, 4, 8, 7]);
    let def = deck.user_element("U5").unwrap();
    assert_eq!((def.nodes, def.properties, def.coordinates), (5, 2, 2));
    assert_eq!(def.dofs, vec![8]);
    assert_eq!(deck.property("E5").unwrap().values, vec![0.003, 0.003]);
    assert!(deck.nodes.is_empty());

    let snapshot = format!("{deck:#?}\n");
    let golden = read("listing1.snap");
    assert_eq!(snapshot, golden, "parse result differs from the checked-in snapshot");
}

#[test]
fn empty_deck() {
    let deck = parse_inp("").unwrap();
    assert!(deck.nodes.is_empty() && deck.elements.is_empty() && deck.properties.is_empty());
    assert!(deck.user_elements.is_empty());
}

#[test]
fn node_count_mismatch_names_the_line() {
    let text = "*USER ELEMENT, NODES=4, TYPE=U4, PROPERTIES=2, COORDINATES=2\n8\n\
                *ELEMENT, TYPE=U4, ELSET=Q\n1, 1, 2, 3, 4, 5\n";
    match parse_inp(text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn unsupported_keyword_rejected_with_line() {
    let text = format!("{}** a comment\n*STEP\n", read("listing1.inp"));
    match parse_inp(&text) {
        Err(Error::Parse { line, message }) => {
            assert_eq!(line, 8);
            assert!(message.to_uppercase().contains("STEP"), "{message}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn mixed_deck_with_overlay_solves() {
    let deck = parse_inp(&read("figure4.inp")).unwrap();
    assert_eq!(deck.nodes.len(), 8);
    let sizes: Vec<usize> = deck.elements.iter().map(|e| e.nodes.len()).collect();
    assert_eq!(sizes, vec![3, 4, 5]);
    let overlay = parse_overlay(&read("figure4_overlay.json")).unwrap();
    let mut model = deck_to_model(&deck, &overlay).unwrap();
    assert_eq!(model.materials["E5"], Material::new(0.003, 0.003, 0.0));
    assert!(validate_mesh(&mut model.mesh).passed());
    let sim = Simulation::new(&model).unwrap();
    let h = sim.steady(0.0).unwrap().heads;
    assert!(h.iter().all(|v| (-1e-10..=1.0 + 1e-10).contains(v)));
}

#[test]
fn set_without_property_is_an_error() {
    let text = read("figure4.inp").replace("*UEL PROPERTY, ELSET=E3\n0.003,0.003\n", "");
    let deck = parse_inp(&text).unwrap();
    assert!(deck_to_model(&deck, &Default::default()).is_err());
}

#[test]
fn minimal_native_model() {
    let text = r#"{
  "format_version": 1,
  "mesh": {
    "nodes": [[0, 0.0, 0.0], [1, 1.0, 0.0], [2, 1.0, 1.0], [3, 0.0, 1.0]],
    "elements": [{"id": 0, "nodes": [0, 1, 2, 3], "material": "m"}]
  },
  "materials": {"m": {"kx": 1.0, "ky": 1.0}},
  "boundary_conditions": {
    "heads": [
      {"name": "left", "nodes": [0, 3], "value": 1.0},
      {"name": "right", "nodes": [1, 2], "value": 0.0}
    ]
  }
}"#;
    let m = parse_native_model(text).unwrap();
    assert_eq!(m.mesh.num_nodes(), 4);
    assert_eq!(m.materials["m"], Material::new(1.0, 1.0, 0.0));
    let h = Simulation::new(&m).unwrap().steady(0.0).unwrap().heads;
    for (n, v) in m.mesh.nodes().iter().zip(&h) {
        assert!((v - (1.0 - n.x)).abs() < 1e-12);
    }

    let dangling = text.replace("\"nodes\": [1, 2], \"value\": 0.0", "\"nodes\": [1, 9], \"value\": 0.0");
    assert!(matches!(parse_native_model(&dangling), Err(Error::Model(_))));
    let bad_dt = text.replace(
        "\"materials\"",
        "\"transient\": {\"t_end\": 1.0, \"dt\": 0.0, \"initial\": \"steady\"},\n  \"materials\"",
    );
    assert!(parse_native_model(&bad_dt).is_err());
}

#[test]
fn ramp_schedule_from_file() {
    let model = parse_native_model(&read("dam_analog.json")).unwrap();
    let s = &model.schedules["reservoir"];
    assert_eq!(s.knots(), &[(0.0, 10.0), (100.0, 30.0), (3001.0, 30.0)]);
    assert_eq!(s.value(50.0), 20.0);
    assert_eq!(s.value(3000.0), 30.0);
}

fn arb_model() -> impl Strategy<Value = SeepageModel> {
    (
        1usize..5,
        1usize..5,
        prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 40),
        (1e-9..1e3f64, 1e-9..1e3f64, 0.0..1.0f64),
        prop::option::of((1e-3..10.0f64, 1usize..4, 0u8..3)),
        prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 0..3),
        -1e3..1e3f64,
    )
        .prop_map(|(nx, ny, jitter, (kx, ky, ss), transient, knots, flux)| {
            // Grid with bit-level coordinate noise; geometry is not checked by the format.
            let mut mesh = PolygonMesh::structured_quads(0.0, 1.0, 0.0, 1.0, nx, ny, "a").unwrap();
            let nodes: Vec<_> = mesh
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    let mut n = *n;
                    n.x += jitter[i % jitter.len()] * 1e-300;
                    n.y = n.y * 0.7 + 1e-3 * (i as f64).sqrt();
                    n
                })
                .collect();
            mesh = PolygonMesh::new(nodes, mesh.elements().to_vec(), mesh.boundary_edges().to_vec()).unwrap();
            let n = mesh.num_nodes();
            let mut model = SeepageModel::with_material(mesh, "a", Material::new(kx, ky, ss));
            model.units = Some("m, s".into());
            model.add_head("left", NodeTarget::Tag("left".into()), jitter[0] % 100.0);
            let mut t = 0.0;
            let mut ks = vec![(0.0, 1.0)];
            for (dt, v) in knots {
                t += dt.abs() + 1e-6;
                ks.push((t, v));
            }
            model.schedules.insert("s".into(), Schedule::new(ks).unwrap());
            model.add_scheduled_head("right", NodeTarget::Nodes(vec![nx]), "s");
            model.flux.push(FluxSet {
                name: "top".into(),
                target: EdgeTarget::Tag("top".into()),
                flux,
            });
            if let Some((dt, stride, init)) = transient {
                model.transient = Some(TransientSettings {
                    t_end: dt * 7.0,
                    dt,
                    stride,
                    initial: match init {
                        0 => InitialHead::Steady,
                        1 => InitialHead::Uniform(jitter[1] % 10.0),
                        _ => InitialHead::Values(jitter.iter().cycle().take(n).copied().collect()),
                    },
                });
            }
            model.monitors.push(Monitor {
                name: "P".into(),
                at: Point2::new(0.5, jitter[2] % 1.0),
            });
            model
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn native_round_trip_is_field_identical(m in arb_model()) {
        let text = serialize_native_model(&m);
        let back = parse_native_model(&text).unwrap();
        prop_assert_eq!(&back, &m);
        for (a, b) in back.mesh.nodes().iter().zip(m.mesh.nodes()) {
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
        prop_assert_eq!(serialize_native_model(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn deck_parser_never_panics_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_inp(&text);
    }

    #[test]
    fn deck_parser_never_panics_on_mutations(
        cut in 0usize..200,
        insert in "[*,=0-9A-Za-z \\n.+-]{0,12}",
        drop in 0usize..8,
    ) {
        let base = read("figure4.inp");
        let at = base.char_indices().map(|(i, _)| i).nth(cut % base.len()).unwrap_or(0);
        let end = (at + drop).min(base.len());
        let end = (end..=base.len()).find(|&i| base.is_char_boundary(i)).unwrap();
        let text = format!("{}{}{}", &base[..at], insert, &base[end..]);
        if let Err(e) = parse_inp(&text) {
            prop_assert!(matches!(e, Error::Parse { line, .. } if line >= 1), "{e}");
        }
    }
}
