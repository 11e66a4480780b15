use roxmltree::{Document, Node};

use crate::error::{Error, Result};
use crate::model::{Annotation, BBox, DamageClass};

/// A VOC `<object>` that could not be turned into an annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectError {
    /// Zero-based position of the `<object>` element in the document.
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VocParse {
    pub annotations: Vec<Annotation>,
    /// Objects whose class name is outside the four damage types.
    pub skipped: usize,
    pub errors: Vec<ObjectError>,
}

/// A whole VOC file: declared image size plus its parsed objects.
#[derive(Debug, Clone, PartialEq)]
pub struct VocDocument {
    pub filename: Option<String>,
    pub width: u32,
    pub height: u32,
    pub parsed: VocParse,
}

fn xml_error(doc_err: roxmltree::Error) -> Error {
    let pos = doc_err.pos();
    Error::Xml {
        line: pos.row,
        column: pos.col,
        message: doc_err.to_string(),
    }
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn child_text<'a>(node: Node<'a, '_>, name: &str) -> Option<&'a str> {
    child(node, name).and_then(|c| c.text()).map(str::trim)
}

fn number(node: Node<'_, '_>, name: &str) -> std::result::Result<f64, String> {
    let text = child_text(node, name).ok_or_else(|| format!("missing <{name}>"))?;
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("<{name}> is not a number: {text:?}"))
}

fn parse_objects(root: Node<'_, '_>, dims: (u32, u32)) -> VocParse {
    let (w, h) = (dims.0 as f64, dims.1 as f64);
    let mut out = VocParse::default();
    for (index, obj) in root.children().filter(|c| c.has_tag_name("object")).enumerate() {
        let Some(name) = child_text(obj, "name") else {
            out.errors.push(ObjectError { index, message: "missing <name>".into() });
            continue;
        };
        let Ok(cls) = name.parse::<DamageClass>() else {
            out.skipped += 1;
            continue;
        };
        let Some(bnd) = child(obj, "bndbox") else {
            out.errors.push(ObjectError { index, message: "missing <bndbox>".into() });
            continue;
        };
        let coords = ["xmin", "ymin", "xmax", "ymax"].map(|k| number(bnd, k));
        let [x_min, y_min, x_max, y_max] = match coords {
            [Ok(a), Ok(b), Ok(c), Ok(d)] => [a, b, c, d],
            _ => {
                let message = coords.into_iter().find_map(|c| c.err()).unwrap_or_default();
                out.errors.push(ObjectError { index, message });
                continue;
            }
        };
        if x_min > x_max || y_min > y_max {
            out.errors.push(ObjectError {
                index,
                message: format!("inverted bndbox ({x_min},{y_min},{x_max},{y_max})"),
            });
            continue;
        }
        let bbox = BBox::new(x_min, y_min, x_max, y_max).clamp_to(w, h);
        out.annotations.push(Annotation::new(cls, bbox));
    }
    out
}

/// Parses the `<object>` entries of a VOC document, clamping boxes to `image_dims`.
pub fn parse_voc(xml_text: &str, image_dims: (u32, u32)) -> Result<VocParse> {
    let doc = Document::parse(xml_text).map_err(xml_error)?;
    Ok(parse_objects(doc.root_element(), image_dims))
}

/// Parses a VOC document using its own `<size>` element for the image bounds.
pub fn parse_voc_document(xml_text: &str) -> Result<VocDocument> {
    let doc = Document::parse(xml_text).map_err(xml_error)?;
    let root = doc.root_element();
    let size = child(root, "size").ok_or_else(|| Error::MissingElement("size".into()))?;
    let dim = |name: &str| -> Result<u32> {
        child_text(size, name)
            .and_then(|t| t.parse::<f64>().ok())
            .filter(|v| *v >= 1.0 && v.fract() == 0.0)
            .map(|v| v as u32)
            .ok_or_else(|| Error::MissingElement(format!("size/{name}")))
    };
    let (width, height) = (dim("width")?, dim("height")?);
    Ok(VocDocument {
        filename: child_text(root, "filename").map(str::to_string),
        width,
        height,
        parsed: parse_objects(root, (width, height)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn voc(objects: &[(&str, [f64; 4])]) -> String {
        let mut s = String::from(
            "<annotation>\n  <filename>x.jpg</filename>\n  <size><width>640</width><height>640</height><depth>3</depth></size>\n",
        );
        for (name, b) in objects {
            s.push_str(&format!(
                "  <object><name>{name}</name><bndbox><xmin>{}</xmin><ymin>{}</ymin><xmax>{}</xmax><ymax>{}</ymax></bndbox></object>\n",
                b[0], b[1], b[2], b[3]
            ));
        }
        s.push_str("</annotation>\n");
        s
    }

    #[test]
    fn direct_mapping() {
        let parsed = parse_voc(&voc(&[("D40", [100.0, 200.0, 300.0, 400.0])]), (640, 640)).unwrap();
        assert_eq!(
            parsed.annotations,
            vec![Annotation::new(DamageClass::D40, BBox::new(100.0, 200.0, 300.0, 400.0))]
        );
        assert_eq!(parsed.skipped, 0);
    }

    #[test]
    fn unknown_class_is_skipped() {
        let parsed = parse_voc(
            &voc(&[("D43", [1.0, 1.0, 5.0, 5.0]), ("D00", [1.0, 1.0, 5.0, 5.0])]),
            (640, 640),
        )
        .unwrap();
        assert_eq!(parsed.skipped, 1);
        assert_eq!(parsed.annotations.len(), 1);
    }

    #[test]
    fn boxes_are_clamped() {
        let parsed = parse_voc(&voc(&[("D10", [600.0, 600.0, 700.0, 700.0])]), (640, 640)).unwrap();
        assert_eq!(parsed.annotations[0].bbox, BBox::new(600.0, 600.0, 640.0, 640.0));
    }

    #[test]
    fn inverted_box_is_reported() {
        let parsed = parse_voc(
            &voc(&[("D10", [300.0, 10.0, 100.0, 20.0]), ("D20", [1.0, 2.0, 3.0, 4.0])]),
            (640, 640),
        )
        .unwrap();
        assert_eq!(parsed.errors.len(), 1);
        assert_eq!(parsed.errors[0].index, 0);
        assert_eq!(parsed.annotations.len(), 1);
    }

    #[test]
    fn malformed_xml_reports_position() {
        let err = parse_voc("<annotation>\n<object><name>D00</name>\n</annotation>", (10, 10)).unwrap_err();
        match err {
            Error::Xml { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn document_reads_size() {
        let doc = parse_voc_document(&voc(&[("D00", [0.0, 0.0, 10.0, 10.0])])).unwrap();
        assert_eq!((doc.width, doc.height), (640, 640));
        assert_eq!(doc.filename.as_deref(), Some("x.jpg"));
        assert_eq!(doc.parsed.annotations.len(), 1);
        assert!(parse_voc_document("<annotation/>").is_err());
    }
}
