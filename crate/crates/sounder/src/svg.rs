//! Minimal static SVG scatter plots for PCA scores.

/// Fixed label palette, cycled.
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Render labeled 2-D points as an SVG scatter. Points are
/// `(label_index, x, y)`; `labels[label_index]` names the series.
pub fn scatter_svg(labels: &[String], points: &[(usize, f64, f64)]) -> String {
    let (width, height, margin) = (640.0, 480.0, 50.0);
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, x, y) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if !x_min.is_finite() || x_min == x_max {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if !y_min.is_finite() || y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let sx = (width - 2.0 * margin) / (x_max - x_min);
    let sy = (height - 2.0 * margin) / (y_max - y_min);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">pc1</text>\n",
        width / 2.0,
        height - 12.0
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 14 {})\">pc2</text>\n",
        height / 2.0,
        height / 2.0
    ));
    for &(li, x, y) in points {
        let px = margin + (x - x_min) * sx;
        let py = height - margin - (y - y_min) * sy;
        let color = COLORS[li % COLORS.len()];
        out.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.5\" fill=\"{color}\" fill-opacity=\"0.7\"/>\n"
        ));
    }
    for (i, label) in labels.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let y = margin / 2.0 + 14.0 * i as f64;
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{y}\" r=\"4\" fill=\"{color}\"/>\n",
            width - margin - 90.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            width - margin - 80.0,
            y + 4.0,
            xml_escape(label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
