use super::{CsiEstimate, Method};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::modem::{Frame, PilotLayout, RxFrame};
use crate::transforms::TFMatrix;

/// LTI comparator: LS on the full pilot column at the start of each block of
/// `block_len` slots, held constant across the block.
pub fn ofdm_baseline_estimate(rx: &RxFrame, frame: &Frame, block_len: usize) -> Result<CsiEstimate> {
    let grid = *frame.grid();
    if block_len == 0 || !grid.n().is_multiple_of(block_len) {
        return Err(Error::InvalidPattern(format!("block length {block_len} must divide N={}", grid.n())));
    }
    match frame.layout() {
        PilotLayout::Block { block_len: b } if b == block_len => {}
        other => {
            return Err(Error::InvalidPattern(format!("frame layout {other:?} is not block pilots of length {block_len}")))
        }
    }
    rx.y.values().check_same(frame.symbols().values())?;
    let (y, x) = (rx.y.values(), frame.symbols().values());
    let h = CMatrix::from_fn(grid.n(), grid.m(), |n, m| {
        let p = n - n % block_len;
        y[(p, m)] / x[(p, m)]
    });
    Ok(CsiEstimate { h: TFMatrix::new(grid, h)?, window_start: 0, method: Method::OfdmBaseline })
}
