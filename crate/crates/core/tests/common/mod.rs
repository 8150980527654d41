#![allow(dead_code)]

pub mod contour;
