use pyo3::prelude::*;

#[pymodule]
fn svnlw_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
