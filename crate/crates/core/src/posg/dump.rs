//! CSV serialization with columns `index,aoh_label_1,aoh_label_2,value`.

use std::io::Write;

use crate::bg::ValueVector;
use crate::error::{Error, Result};
use crate::model::{enumerate_aohs, Agent, PosgModel};
use crate::scalar::Scalar;

use super::Statistic;

const HEADER: [&str; 4] = ["index", "aoh_label_1", "aoh_label_2", "value"];

/// One row per joint AOH, agent-one-major.
pub fn write_statistic_csv<T: Scalar, W: Write>(
    model: &PosgModel<T>,
    sigma: &Statistic<T>,
    out: W,
) -> Result<()> {
    let t = sigma.stage();
    let l1 = enumerate_aohs(model, Agent::One, t)?;
    let l2 = enumerate_aohs(model, Agent::Two, t)?;
    if sigma.as_slice().len() != l1.len() * l2.len() {
        return Err(Error::Shape(format!(
            "statistic does not match the stage-{t} AOH sets"
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for (j, p) in sigma.as_slice().iter().enumerate() {
        let (i1, i2) = (j / l2.len(), j % l2.len());
        w.write_record([
            j.to_string(),
            l1[i1].label(model),
            l2[i2].label(model),
            format!("{:e}", p.as_f64()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per pivot AOH; the opponent label column is empty.
pub fn write_value_vector_csv<T: Scalar, W: Write>(
    model: &PosgModel<T>,
    v: &ValueVector<T>,
    out: W,
) -> Result<()> {
    let stage = v.stage.ok_or_else(|| {
        Error::Shape("value vector has no stage; it is not indexed by AOHs".into())
    })?;
    let labels = enumerate_aohs(model, v.pivot, stage)?;
    if labels.len() != v.values.len() {
        return Err(Error::Shape(format!(
            "value vector does not match the stage-{stage} AOH set"
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for (i, (x, a)) in v.values.iter().zip(&labels).enumerate() {
        let (c1, c2) = match v.pivot {
            Agent::One => (a.label(model), String::new()),
            Agent::Two => (String::new(), a.label(model)),
        };
        w.write_record([i.to_string(), c1, c2, format!("{:e}", x.as_f64())])?;
    }
    w.flush()?;
    Ok(())
}
