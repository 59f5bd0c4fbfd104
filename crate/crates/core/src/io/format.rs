use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::geometry::Vector;
use crate::{Error, Result};

/// Seventeen significant digits in scientific notation; parses back to the same bits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON whose floats are written by [`format_f64`].
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes with two-space indentation and fixed-format floats, ending in a newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// One point per line, coordinates separated by commas, no header.
pub fn write_points_csv(points: &[Vector]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for p in points {
        w.write_record(p.as_slice().iter().map(|&x| format_f64(x)))
            .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("formatted floats are ASCII"))
}

pub fn read_points_csv(text: &str) -> Result<Vec<Vector>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let coords = record
            .iter()
            .enumerate()
            .map(|(k, s)| {
                s.trim().parse::<f64>().map_err(|e| Error::Document {
                    path: format!("line {}, column {}", line + 1, k + 1),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if coords.is_empty() || coords.len() > crate::geometry::MAX_DIM {
            return Err(Error::Document {
                path: format!("line {}", line + 1),
                message: format!("{} coordinates per point", coords.len()),
            });
        }
        out.push(Vector::from_slice(&coords));
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    let path = e
        .position()
        .map_or_else(|| "csv".to_string(), |p| format!("line {}", p.line()));
    Error::Document {
        path,
        message: e.to_string(),
    }
}
