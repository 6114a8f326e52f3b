/// Round to 9 significant digits; `-0.0` becomes `0.0`.
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let y: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

/// Shortest decimal text of `sig9(x)`.
pub fn num(x: f64) -> String {
    ryu::Buffer::new().format(sig9(x)).to_owned()
}

/// `serde` adapter that rounds an `f64` field on the way out.
pub mod rounded {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::sig9(*x))
    }
}

/// Same as [`rounded`] for optional fields.
pub mod rounded_opt {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&super::sig9(*v)),
            None => s.serialize_none(),
        }
    }
}
