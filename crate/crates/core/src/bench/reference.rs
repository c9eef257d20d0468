//! Published CPU reference figures for the level-1 kernels, SpMV and the
//! acoustic matrix sketches. Used for the flop-model self-check and as
//! side-by-side annotation in benchmark output; never as pass/fail timing
//! targets.

use crate::cnum::{FlopModel, Kernel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelRow {
    pub h: u64,
    pub cpu_ms: f64,
    pub cpu_gflops: f64,
}

const fn row(h: u64, cpu_ms: f64, cpu_gflops: f64) -> KernelRow {
    KernelRow { h, cpu_ms, cpu_gflops }
}

pub const KERNEL_TABLES: [(Kernel, [KernelRow; 6]); 6] = [
    (
        Kernel::Assign,
        [
            row(100_000, 0.10, 0.96),
            row(500_000, 0.75, 0.67),
            row(1_000_000, 2.04, 0.49),
            row(8_000_000, 15.71, 0.51),
            row(10_000_000, 20.00, 0.50),
            row(15_000_000, 27.50, 0.55),
        ],
    ),
    (
        Kernel::Scal,
        [
            row(100_000, 0.81, 0.74),
            row(500_000, 4.17, 0.72),
            row(1_000_000, 8.33, 0.72),
            row(8_000_000, 65.00, 0.74),
            row(10_000_000, 85.00, 0.71),
            row(15_000_000, 120.00, 0.75),
        ],
    ),
    (
        Kernel::Axpy,
        [
            row(100_000, 0.83, 0.97),
            row(500_000, 4.17, 0.96),
            row(1_000_000, 8.33, 0.96),
            row(8_000_000, 65.00, 0.98),
            row(10_000_000, 85.00, 0.94),
            row(15_000_000, 130.00, 0.92),
        ],
    ),
    (
        Kernel::Axmy,
        [
            row(100_000, 1.37, 0.44),
            row(500_000, 6.25, 0.48),
            row(1_000_000, 13.75, 0.44),
            row(8_000_000, 100.00, 0.48),
            row(10_000_000, 130.00, 0.46),
            row(15_000_000, 190.00, 0.47),
        ],
    ),
    (
        Kernel::Dot,
        [
            row(100_000, 0.88, 0.91),
            row(500_000, 4.55, 0.88),
            row(1_000_000, 9.09, 0.88),
            row(8_000_000, 70.00, 0.91),
            row(10_000_000, 90.00, 0.89),
            row(15_000_000, 130.00, 0.92),
        ],
    ),
    (
        Kernel::Norm2,
        [
            row(100_000, 1.72, 0.29),
            row(500_000, 7.69, 0.33),
            row(1_000_000, 16.67, 0.30),
            row(8_000_000, 140.00, 0.29),
            row(10_000_000, 170.00, 0.29),
            row(15_000_000, 260.00, 0.29),
        ],
    ),
];

/// Matrix sketch row: name, h, nz, density (%), bandwidth, max row, nz/h,
/// nz/h standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SketchRow {
    pub name: &'static str,
    pub h: u64,
    pub nz: u64,
    pub density: f64,
    pub bandwidth: u64,
    pub max_row: u64,
    pub nz_per_h: f64,
    pub nz_per_h_stddev: f64,
}

pub const MATRIX_SKETCHES: [SketchRow; 10] = [
    SketchRow { name: "Audi3D-1", h: 1_727, nz: 16_393, density: 0.550, bandwidth: 1_436, max_row: 27, nz_per_h: 9.492, nz_per_h_stddev: 10.205 },
    SketchRow { name: "Audi3D-2", h: 11_637, nz: 188_455, density: 0.139, bandwidth: 11_237, max_row: 27, nz_per_h: 16.194, nz_per_h_stddev: 11.223 },
    SketchRow { name: "Audi3D-3", h: 85_001, nz: 1_781_707, density: 0.025, bandwidth: 84_474, max_row: 27, nz_per_h: 20.961, nz_per_h_stddev: 9.832 },
    SketchRow { name: "Audi3D-4", h: 648_849, nz: 15_444_211, density: 0.004, bandwidth: 520_461, max_row: 27, nz_per_h: 23.802, nz_per_h_stddev: 7.720 },
    SketchRow { name: "Twingo3D-0", h: 8_439, nz: 143_889, density: 0.202, bandwidth: 6_268, max_row: 27, nz_per_h: 17.050, nz_per_h_stddev: 11.047 },
    SketchRow { name: "Twingo3D-1", h: 62_357, nz: 1_351_521, density: 0.035, bandwidth: 53_935, max_row: 33, nz_per_h: 21.674, nz_per_h_stddev: 9.364 },
    SketchRow { name: "Twingo3D-2", h: 479_169, nz: 11_616_477, density: 0.005, bandwidth: 470_625, max_row: 39, nz_per_h: 24.243, nz_per_h_stddev: 7.233 },
    SketchRow { name: "Cylinder3D-0", h: 2_717, nz: 30_969, density: 0.420, bandwidth: 2_361, max_row: 75, nz_per_h: 11.398, nz_per_h_stddev: 11.453 },
    SketchRow { name: "Cylinder3D-1", h: 19_041, nz: 343_677, density: 0.095, bandwidth: 18_629, max_row: 75, nz_per_h: 18.049, nz_per_h_stddev: 11.051 },
    SketchRow { name: "Cylinder3D-2", h: 142_049, nz: 3_151_773, density: 0.016, bandwidth: 141_289, max_row: 75, nz_per_h: 22.188, nz_per_h_stddev: 9.125 },
];

/// SpMV reference: problem name, CPU time (ms), CPU Gflops.
pub const SPMV_TABLE: [(&str, f64, f64); 11] = [
    ("Audi3D-0", 0.01, 0.61),
    ("Audi3D-1", 0.20, 0.67),
    ("Audi3D-2", 2.22, 0.68),
    ("Audi3D-3", 20.00, 0.71),
    ("Audi3D-4", 180.00, 0.69),
    ("Twingo3D-0", 1.67, 0.69),
    ("Twingo3D-1", 15.71, 0.69),
    ("Twingo3D-2", 140.00, 0.66),
    ("Cylinder3D-0", 0.37, 0.67),
    ("Cylinder3D-1", 3.70, 0.74),
    ("Cylinder3D-2", 36.67, 0.69),
];

pub fn kernel_table(kernel: Kernel) -> Option<&'static [KernelRow; 6]> {
    KERNEL_TABLES.iter().find(|(k, _)| *k == kernel).map(|(_, rows)| rows)
}

/// Published CPU time for `kernel` at exactly size `h`, if tabulated.
pub fn paper_cpu_ms(kernel: Kernel, h: u64) -> Option<f64> {
    kernel_table(kernel)?.iter().find(|r| r.h == h).map(|r| r.cpu_ms)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlopCheckCell {
    pub kernel: Kernel,
    pub h: u64,
    pub printed_gflops: f64,
    pub model_gflops: f64,
    pub rel_error: f64,
}

impl FlopCheckCell {
    pub fn within(&self, rel: f64) -> bool {
        self.rel_error <= rel
    }
}

/// Applies the flop model to every published `(h, time)` pair and compares
/// with the printed Gflops.
pub fn flop_model_check(model: &FlopModel) -> Vec<FlopCheckCell> {
    KERNEL_TABLES
        .iter()
        .flat_map(|(kernel, rows)| {
            rows.iter().map(move |r| {
                let model_gflops = model.gflops(*kernel, r.h, r.cpu_ms);
                FlopCheckCell {
                    kernel: *kernel,
                    h: r.h,
                    printed_gflops: r.cpu_gflops,
                    model_gflops,
                    rel_error: (model_gflops - r.cpu_gflops).abs() / r.cpu_gflops,
                }
            })
        })
        .collect()
}
