//! Published reference tables, transcribed cell by cell.

#![allow(dead_code)]

pub const TABLE_99: [[f64; 6]; 10] = [
    [16.97, 15.08, 14.36, 13.58, 12.66, 11.96],
    [8.49, 7.54, 7.18, 6.79, 6.33, 5.98],
    [5.66, 5.03, 4.79, 4.53, 4.22, 3.99],
    [4.24, 3.77, 3.59, 3.40, 3.16, 2.99],
    [3.39, 3.02, 2.87, 2.72, 2.53, 2.39],
    [2.83, 2.51, 2.39, 2.26, 2.11, 1.99],
    [2.42, 2.15, 2.05, 1.94, 1.81, 1.71],
    [2.12, 1.88, 1.80, 1.70, 1.58, 1.50],
    [1.89, 1.68, 1.60, 1.51, 1.41, 1.33],
    [1.70, 1.51, 1.44, 1.36, 1.27, 1.20],
];

pub const TABLE_95: [[f64; 6]; 10] = [
    [13.67, 11.78, 11.06, 10.28, 9.36, 8.66],
    [6.84, 5.89, 5.53, 5.14, 4.68, 4.33],
    [4.56, 3.93, 3.69, 3.43, 3.12, 2.89],
    [3.42, 2.94, 2.77, 2.57, 2.34, 2.17],
    [2.73, 2.36, 2.21, 2.06, 1.87, 1.73],
    [2.28, 1.96, 1.84, 1.71, 1.56, 1.44],
    [1.95, 1.68, 1.58, 1.47, 1.34, 1.24],
    [1.71, 1.47, 1.38, 1.29, 1.17, 1.08],
    [1.52, 1.31, 1.23, 1.14, 1.04, 0.96],
    [1.37, 1.18, 1.11, 1.03, 0.94, 0.87],
];

pub const TABLE_75: [[f64; 6]; 10] = [
    [9.98, 8.09, 7.37, 6.59, 5.67, 4.97],
    [4.99, 4.04, 3.69, 3.30, 2.83, 2.48],
    [3.33, 2.70, 2.46, 2.20, 1.89, 1.66],
    [2.50, 2.02, 1.84, 1.65, 1.42, 1.24],
    [2.00, 1.62, 1.47, 1.32, 1.13, 0.99],
    [1.66, 1.35, 1.23, 1.10, 0.94, 0.83],
    [1.43, 1.16, 1.05, 0.94, 0.81, 0.71],
    [1.25, 1.01, 0.92, 0.82, 0.71, 0.62],
    [1.11, 0.90, 0.82, 0.73, 0.63, 0.55],
    [1.00, 0.81, 0.74, 0.66, 0.57, 0.50],
];

pub const TABLE_50: [[f64; 6]; 10] = [
    [7.78, 5.89, 5.17, 4.39, 3.47, 2.77],
    [3.89, 2.94, 2.59, 2.20, 1.73, 1.39],
    [2.59, 1.96, 1.72, 1.46, 1.16, 0.92],
    [1.95, 1.47, 1.29, 1.10, 0.87, 0.69],
    [1.56, 1.18, 1.03, 0.88, 0.69, 0.55],
    [1.30, 0.98, 0.86, 0.73, 0.58, 0.46],
    [1.11, 0.84, 0.74, 0.63, 0.50, 0.40],
    [0.97, 0.74, 0.65, 0.55, 0.43, 0.35],
    [0.86, 0.65, 0.57, 0.49, 0.39, 0.31],
    [0.78, 0.59, 0.52, 0.44, 0.35, 0.28],
];
/// `(target, table)` in publication order.
pub const PUBLISHED: [(f64, &[[f64; 6]; 10]); 4] = [
    (0.99, &TABLE_99),
    (0.95, &TABLE_95),
    (0.75, &TABLE_75),
    (0.50, &TABLE_50),
];
