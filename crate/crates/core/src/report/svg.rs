use std::fmt::Write;

/// Minimal SVG document builder. Coordinates are printed with two
/// decimals, so equal inputs give equal bytes.
pub(crate) struct Svg {
    width: f64,
    height: f64,
    body: String,
    depth: usize,
}

pub(crate) fn coord(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

impl Svg {
    pub(crate) fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
            depth: 1,
        }
    }

    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.body.push_str("  ");
        }
    }

    fn element(&mut self, name: &str, attrs: &[(&str, String)], title: Option<&str>) {
        self.indent();
        let _ = write!(self.body, "<{name}");
        for (k, v) in attrs {
            let _ = write!(self.body, " {k}=\"{}\"", escape(v));
        }
        match title {
            Some(t) => {
                let _ = writeln!(self.body, "><title>{}</title></{name}>", escape(t));
            }
            None => self.body.push_str("/>\n"),
        }
    }

    pub(crate) fn open(&mut self, attrs: &[(&str, String)]) {
        self.indent();
        self.body.push_str("<g");
        for (k, v) in attrs {
            let _ = write!(self.body, " {k}=\"{}\"", escape(v));
        }
        self.body.push_str(">\n");
        self.depth += 1;
    }

    pub(crate) fn close(&mut self) {
        self.depth -= 1;
        self.indent();
        self.body.push_str("</g>\n");
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn rect(
        &mut self,
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        fill: &str,
        extra: &[(&str, String)],
        title: Option<&str>,
    ) {
        let mut attrs = vec![
            ("x", coord(x)),
            ("y", coord(y)),
            ("width", coord(w)),
            ("height", coord(h)),
            ("fill", fill.to_string()),
        ];
        attrs.extend(extra.iter().cloned());
        self.element("rect", &attrs, title);
    }

    pub(crate) fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        self.element(
            "line",
            &[
                ("x1", coord(x1)),
                ("y1", coord(y1)),
                ("x2", coord(x2)),
                ("y2", coord(y2)),
                ("stroke", stroke.into()),
            ],
            None,
        );
    }

    pub(crate) fn polyline(
        &mut self,
        points: &[(f64, f64)],
        stroke: &str,
        extra: &[(&str, String)],
    ) {
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", coord(x), coord(y)))
            .collect();
        let mut attrs = vec![
            ("points", pts.join(" ")),
            ("fill", "none".into()),
            ("stroke", stroke.into()),
        ];
        attrs.extend(extra.iter().cloned());
        self.element("polyline", &attrs, None);
    }

    pub(crate) fn polygon(
        &mut self,
        points: &[(f64, f64)],
        fill: &str,
        extra: &[(&str, String)],
        title: Option<&str>,
    ) {
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", coord(x), coord(y)))
            .collect();
        let mut attrs = vec![("points", pts.join(" ")), ("fill", fill.into())];
        attrs.extend(extra.iter().cloned());
        self.element("polygon", &attrs, title);
    }

    pub(crate) fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, title: Option<&str>) {
        self.element(
            "circle",
            &[
                ("cx", coord(cx)),
                ("cy", coord(cy)),
                ("r", coord(r)),
                ("fill", fill.into()),
            ],
            title,
        );
    }

    pub(crate) fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        self.indent();
        let _ = writeln!(
            self.body,
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"{anchor}\">{}</text>",
            coord(x),
            coord(y),
            coord(size),
            escape(content)
        );
    }

    pub(crate) fn finish(self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">",
            w = coord(self.width),
            h = coord(self.height)
        );
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}
