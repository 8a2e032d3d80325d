//! Killing forms, trace forms and Jacobi defects of the built-in frame algebras.

use conegeom::lie::FrameAlgebra;

fn main() -> conegeom::Result<()> {
    for name in ["qa-im(-1,-1)", "qa-im(1,1)", "qa-im(-1,0)", "heis(3)", "aff1c", "unibasis(1,0.5)"] {
        let f = FrameAlgebra::preset_by_name(name)?;
        let k = f.killing_form();
        let diag: Vec<f64> = (0..f.dim()).map(|i| k[[i, i]]).collect();
        println!("{name:>16}: jacobi {:.1e}  killing diag {diag:?}  ell {:?}", f.jacobi_defect(), f.trace_form());
    }
    Ok(())
}
