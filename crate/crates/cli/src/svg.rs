//! SVG rendering of graphical-store snapshots: one shape element per object,
//! y growing downward, canvas sized to the bounding box plus a 10px margin.

use chrvis_core::graphics::{GraphicalObject, VisualKind};
use chrvis_core::Term;

const MARGIN: i64 = 10;
const NOMINAL: i64 = 20;

fn color(name: &Term) -> String {
    let name = name.to_string();
    match name.as_str() {
        "black" => "#000000",
        "white" => "#ffffff",
        "red" => "#ff0000",
        "green" => "#008000",
        "blue" => "#0000ff",
        "yellow" => "#ffff00",
        "pink" => "#ffc0cb",
        "orange" => "#ffa500",
        "purple" => "#800080",
        "brown" => "#a52a2a",
        "gray" => "#808080",
        "cyan" => "#00ffff",
        "magenta" => "#ff00ff",
        "lime" => "#00ff00",
        "navy" => "#000080",
        "teal" => "#008080",
        other => return other.to_string(),
    }
    .to_string()
}

fn int(term: &Term) -> i64 {
    match term {
        Term::Int(n) => *n,
        _ => 0,
    }
}

struct Bounds {
    min_x: i64,
    min_y: i64,
    max_x: i64,
    max_y: i64,
}

impl Bounds {
    fn new() -> Bounds {
        Bounds { min_x: 0, min_y: 0, max_x: 0, max_y: 0 }
    }

    fn cover(&mut self, x0: i64, y0: i64, x1: i64, y1: i64) {
        self.min_x = self.min_x.min(x0.min(x1));
        self.min_y = self.min_y.min(y0.min(y1));
        self.max_x = self.max_x.max(x0.max(x1));
        self.max_y = self.max_y.max(y0.max(y1));
    }
}

fn extent(obj: &GraphicalObject, bounds: &mut Bounds) {
    let a = &obj.actuals;
    match obj.kind {
        VisualKind::Node => {
            let (x, y) = (int(&a[1]), int(&a[2]));
            bounds.cover(x, y, x + int(&a[3]), y + int(&a[4]));
        }
        VisualKind::Circle => {
            let (x, y, r) = (int(&a[1]), int(&a[2]), int(&a[3]));
            bounds.cover(x - r, y - r, x + r, y + r);
        }
        VisualKind::Text => {
            let (x, y) = (int(&a[1]), int(&a[2]));
            bounds.cover(x, y, x + NOMINAL, y + NOMINAL);
        }
        VisualKind::Line => {
            bounds.cover(int(&a[1]), int(&a[2]), int(&a[3]), int(&a[4]));
        }
        VisualKind::Image => {
            let (x, y) = (int(&a[1]), int(&a[2]));
            bounds.cover(x, y, x + NOMINAL, y + NOMINAL);
        }
        _ => {}
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn shape(obj: &GraphicalObject) -> String {
    let a = &obj.actuals;
    let name = escape(&obj.name);
    match obj.kind {
        VisualKind::Node => {
            let (x, y, w, h) = (int(&a[1]), int(&a[2]), int(&a[3]), int(&a[4]));
            let stroke = color(&a[7]);
            let fill = color(&a[8]);
            if a[10].to_string() == "CIRC" {
                let (rx, ry) = (w.max(1) / 2, h.max(1) / 2);
                format!(
                    "<ellipse data-name=\"{name}\" cx=\"{}\" cy=\"{}\" rx=\"{rx}\" ry=\"{ry}\" fill=\"{fill}\" stroke=\"{stroke}\"/>",
                    x + rx,
                    y + ry
                )
            } else {
                format!(
                    "<rect data-name=\"{name}\" x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{fill}\" stroke=\"{stroke}\"/>"
                )
            }
        }
        VisualKind::Circle => {
            let (x, y, r) = (int(&a[1]), int(&a[2]), int(&a[3]));
            let stroke = color(&a[4]);
            let fill = color(&a[5]);
            format!(
                "<circle data-name=\"{name}\" cx=\"{x}\" cy=\"{y}\" r=\"{r}\" fill=\"{fill}\" stroke=\"{stroke}\"/>"
            )
        }
        VisualKind::Text => {
            let (x, y) = (int(&a[1]), int(&a[2]));
            let fill = color(&a[3]);
            let label = escape(&a[4].to_string());
            format!("<text data-name=\"{name}\" x=\"{x}\" y=\"{y}\" fill=\"{fill}\">{label}</text>")
        }
        VisualKind::Line => {
            let (x1, y1, x2, y2) = (int(&a[1]), int(&a[2]), int(&a[3]), int(&a[4]));
            let stroke = color(&a[5]);
            format!(
                "<line data-name=\"{name}\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"{stroke}\"/>"
            )
        }
        VisualKind::Image => {
            let (x, y) = (int(&a[1]), int(&a[2]));
            let href = escape(&a[3].to_string());
            format!(
                "<image data-name=\"{name}\" x=\"{x}\" y=\"{y}\" width=\"{NOMINAL}\" height=\"{NOMINAL}\" href=\"{href}\"/>"
            )
        }
        _ => String::new(),
    }
}

/// Render a snapshot into a standalone SVG document.
pub fn render_svg(objects: &[GraphicalObject]) -> String {
    let mut bounds = Bounds::new();
    for obj in objects {
        extent(obj, &mut bounds);
    }
    let view_x = bounds.min_x - MARGIN;
    let view_y = bounds.min_y - MARGIN;
    let width = (bounds.max_x - bounds.min_x) + 2 * MARGIN;
    let height = (bounds.max_y - bounds.min_y) + 2 * MARGIN;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{view_x} {view_y} {width} {height}\" width=\"{width}\" height=\"{height}\">\n"
    );
    for obj in objects {
        out.push_str("  ");
        out.push_str(&shape(obj));
        out.push('\n');
    }
    out.push_str("</svg>\n");
    out
}
