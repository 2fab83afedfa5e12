use super::kernel::{convolve3x3, GradientPair, SobelMasks};

/// Default line-buffer depth: wide enough for 1920-pixel rows.
pub const DEFAULT_LINE_BUFFER_DEPTH: usize = 1920;

/// One image row held in a dual-port RAM.
#[derive(Debug)]
pub struct LineBuffer {
    cells: Vec<u8>,
    write_col: usize,
}

impl Clone for LineBuffer {
    fn clone(&self) -> Self {
        Self {
            cells: self.cells.clone(),
            write_col: self.write_col,
        }
    }

    fn clone_from(&mut self, source: &Self) {
        self.cells.clone_from(&source.cells);
        self.write_col = source.write_col;
    }
}

impl LineBuffer {
    pub fn new(depth: usize) -> Self {
        Self {
            cells: vec![0; depth],
            write_col: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.cells.len()
    }

    /// Column most recently written.
    pub fn write_col(&self) -> usize {
        self.write_col
    }

    pub fn read(&self, col: usize) -> u8 {
        self.cells[col]
    }

    pub fn write(&mut self, col: usize, value: u8) {
        self.cells[col] = value;
        self.write_col = col;
    }

    pub fn clear(&mut self) {
        self.cells.fill(0);
        self.write_col = 0;
    }
}

/// Nine window registers organised as three 3-deep shift rows.
///
/// Register `[row][0]` receives the incoming column, so in image order the
/// newest pixel sits at the right edge of the neighbourhood.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Window3x3 {
    regs: [[u8; 3]; 3],
}

impl Window3x3 {
    /// Builds a window from a neighbourhood given in image order.
    pub fn from_image_order(cells: [[u8; 3]; 3]) -> Self {
        let mut regs = [[0; 3]; 3];
        for (reg, row) in regs.iter_mut().zip(cells) {
            *reg = [row[2], row[1], row[0]];
        }
        Self { regs }
    }

    /// Shifts every row by one register and loads `column` (top to bottom)
    /// into register 0.
    pub fn shift_in(&mut self, column: [u8; 3]) {
        for (reg, px) in self.regs.iter_mut().zip(column) {
            reg[2] = reg[1];
            reg[1] = reg[0];
            reg[0] = px;
        }
    }

    /// Pixel at (`row`, `col`) of the neighbourhood in image order.
    pub fn at(&self, row: usize, col: usize) -> u8 {
        self.regs[row][2 - col]
    }

    pub fn image_order(&self) -> [[u8; 3]; 3] {
        let mut out = [[0; 3]; 3];
        for (row, reg) in out.iter_mut().zip(&self.regs) {
            *row = [reg[2], reg[1], reg[0]];
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let w = self.image_order();
        let mut t = [[0; 3]; 3];
        for (i, row) in w.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t[j][i] = v;
            }
        }
        Self::from_image_order(t)
    }

    pub fn gradient(&self, masks: &SobelMasks) -> GradientPair {
        convolve3x3(&self.image_order(), masks)
    }
}
