pub mod compose;
pub mod config;
pub mod chart;
pub mod corpus;
pub mod error;
pub mod font;
pub mod layout;
pub mod raster;
pub mod seed;
pub mod table;
pub mod text;
