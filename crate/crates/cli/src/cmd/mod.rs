pub mod complex;
pub mod enumerate;
pub mod exhaustive;
pub mod oracle;
pub mod simulate;
pub mod verify;
