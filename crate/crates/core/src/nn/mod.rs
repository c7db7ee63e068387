//! A small deterministic CNN engine: exactly the layer kinds needed for the
//! emotion classifier (DERN) and the shape regressors (DSRN).

mod adam;
mod arch;
mod gradcheck;
mod io;
mod layer;
mod loss;
mod network;
mod tensor;
mod train;

pub use adam::{Adam, AdamConfig};
pub use arch::{dern_layers, dsrn_layers, DernConfig, DsrnConfig};
pub use gradcheck::{finite_difference_gradients, relative_error};
pub use io::{load_model, save_model, MODEL_MAGIC};
pub use layer::{LayerSpec, Shape3};
pub use loss::{loss_mse, loss_xent, Loss, Target};
pub use network::{Gradients, Network};
pub use tensor::Tensor;
pub use train::{evaluate_loss, train, Dataset, EpochLog, TrainConfig};
