use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensograph::{
    consensus_layout, force_percentages, gabriel_graph, render_consensus, render_tablecloth, ConsensusLayout,
    LayoutParams, Point2D, RenderStyle, Sheet, SimilarityMatrix, Tablecloth,
};

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("S{i}")).collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, a: u32) -> SimilarityMatrix {
    let mut c = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            c[i][j] = rng.gen_range(0..=a);
            c[j][i] = c[i][j];
        }
    }
    SimilarityMatrix::from_counts(c, a as usize).unwrap()
}

fn num(node: &roxmltree::Node, attr: &str) -> f64 {
    node.attribute(attr).unwrap().parse().unwrap()
}

#[test]
fn output_is_xml_inside_the_viewbox() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let style = RenderStyle::default();
    for _ in 0..25 {
        let n = rng.gen_range(2..12);
        let m = random_matrix(&mut rng, n, 6);
        let layout = consensus_layout(&m, &LayoutParams::default()).unwrap();
        let svg = render_consensus(&layout, &names(n), &style).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        let inside = |x: f64, y: f64| (0.0..=style.width).contains(&x) && (0.0..=style.height).contains(&y);
        let mut widths = Vec::new();
        for node in root.descendants().filter(|n| n.is_element()) {
            match node.tag_name().name() {
                "line" => {
                    assert!(inside(num(&node, "x1"), num(&node, "y1")));
                    assert!(inside(num(&node, "x2"), num(&node, "y2")));
                    widths.push(num(&node, "stroke-width"));
                }
                "circle" => {
                    let (x, y, r) = (num(&node, "cx"), num(&node, "cy"), num(&node, "r"));
                    assert!(inside(x - r, y - r) && inside(x + r, y + r));
                }
                "text" | "rect" => assert!(inside(num(&node, "x"), num(&node, "y"))),
                _ => {}
            }
            for a in node.attributes() {
                assert!(!a.value().contains("http") || a.name() == "xmlns", "external reference {a:?}");
            }
        }
        let nonzero = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| m.count(i, j) > 0);
        assert_eq!(widths.len(), nonzero.count(), "zero-force pairs must not be drawn");
        assert!(widths.windows(2).all(|w| w[0] <= w[1]), "edges drawn weakest first");
    }
}

#[test]
fn encoding_is_monotone() {
    let style = RenderStyle::default();
    let fs: Vec<f64> = (0..=100).map(|k| f64::from(k) / 100.0).collect();
    for w in fs.windows(2) {
        assert!(style.stroke_width(w[1]) > style.stroke_width(w[0]));
        assert!(style.opacity(w[1]) > style.opacity(w[0]));
    }
    assert_eq!(style.stroke_width(1.0), style.stroke_max);
    assert_eq!(style.opacity(0.0), style.opacity_min);
}

#[test]
fn single_assessor_edges_share_maximal_thickness() {
    let t = Tablecloth::from_positions(
        "only",
        Sheet::default(),
        [(5.0, 5.0), (20.0, 30.0), (40.0, 12.0), (55.0, 35.0), (30.0, 20.0)]
            .into_iter()
            .map(|(x, y)| Point2D::new(x, y)),
    );
    let g = gabriel_graph(&t).unwrap();
    let m = sensograph::aggregate(std::slice::from_ref(&g)).unwrap();
    let layout = consensus_layout(&m, &LayoutParams::default()).unwrap();
    let style = RenderStyle::default();
    let svg = render_consensus(&layout, &names(5), &style).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let widths: Vec<f64> = doc
        .descendants()
        .filter(|n| n.has_tag_name("line"))
        .map(|n| num(&n, "stroke-width"))
        .collect();
    assert_eq!(widths.len(), g.len());
    assert!(widths.iter().all(|&w| (w - style.stroke_max).abs() < 1e-9));
}

#[test]
fn single_sample_has_node_and_legend() {
    let m = SimilarityMatrix::zeros(1, 1);
    let (forces, percentages) = force_percentages(&m);
    let layout = ConsensusLayout {
        positions: vec![Point2D::new(0.0, 0.0)],
        forces,
        percentages,
        final_energy: 0.0,
        iterations_used: 0,
        converged: true,
        informative: true,
        disconnected: false,
    };
    let svg = render_consensus(&layout, &names(1), &RenderStyle::default()).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 1);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("line")).count(), 0);
    assert!(svg.contains("0%") && svg.contains("100%"));
    assert_eq!(svg, render_consensus(&layout, &names(1), &RenderStyle::default()).unwrap());
}

#[test]
fn tablecloth_views() {
    let style = RenderStyle::default();
    let two = Tablecloth::from_positions("a", Sheet::default(), [Point2D::new(10.0, 10.0), Point2D::new(30.0, 25.0)]);
    let svg = render_tablecloth(&two, &gabriel_graph(&two).unwrap(), &[], &style).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("sheet")).count(), 1);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 2);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("line")).count(), 1);

    let empty = Tablecloth::from_positions("e", Sheet::default(), []);
    let svg = render_tablecloth(&empty, &gabriel_graph(&empty).unwrap(), &[], &style).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("sheet")).count(), 1);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 0);
}
