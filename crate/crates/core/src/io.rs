//! JSON wire formats. Complex numbers are always two-element `[re, im]`
//! arrays; complex matrices are row-major arrays of rows of such pairs.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{C64, CMatrix};
use crate::plants::{OdePdePlant, PlantKind};
use crate::spectral::{ModalTriple, SpectralModel};
use crate::synthesis::{Certificate, ControllerRealization, Representation, UncertaintySpec};
use nalgebra::DMatrix;

pub type ComplexDto = [f64; 2];
pub type CMatrixDto = Vec<Vec<ComplexDto>>;
pub type RMatrixDto = Vec<Vec<f64>>;

pub fn complex_to_dto(c: &C64) -> ComplexDto {
    [c.re, c.im]
}

pub fn complex_from_dto(d: &ComplexDto) -> C64 {
    C64::new(d[0], d[1])
}

pub fn cmatrix_to_dto(m: &CMatrix) -> CMatrixDto {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_to_dto(&m[(i, j)])).collect())
        .collect()
}

pub fn cmatrix_from_dto(d: &CMatrixDto, rows: usize, cols: usize, name: &str) -> Result<CMatrix> {
    if d.len() != rows || d.iter().any(|r| r.len() != cols) {
        return Err(CoreError::DimensionMismatch(format!(
            "{name}: expected {rows}x{cols}, got {}x{:?}",
            d.len(),
            d.first().map(|r| r.len()).unwrap_or(0)
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| complex_from_dto(&d[i][j])))
}

fn cmatrix_from_dto_free(d: &CMatrixDto, name: &str) -> Result<CMatrix> {
    let rows = d.len();
    let cols = d.first().map(|r| r.len()).unwrap_or(0);
    cmatrix_from_dto(d, rows, cols, name)
}

pub fn rmatrix_from_dto(d: &RMatrixDto, name: &str) -> Result<DMatrix<f64>> {
    let rows = d.len();
    let cols = d.first().map(|r| r.len()).unwrap_or(0);
    if d.iter().any(|r| r.len() != cols) {
        return Err(CoreError::DimensionMismatch(format!("{name}: ragged rows")));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| d[i][j]))
}

pub fn rmatrix_to_dto(m: &DMatrix<f64>) -> RMatrixDto {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailEntryFile {
    pub a: ComplexDto,
    pub b: Vec<ComplexDto>,
    pub c: Vec<ComplexDto>,
}

/// On-disk spectral model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub delta: f64,
    #[serde(rename = "A0")]
    pub a0: CMatrixDto,
    #[serde(rename = "A1")]
    pub a1: CMatrixDto,
    #[serde(rename = "B0")]
    pub b0: CMatrixDto,
    #[serde(rename = "B1")]
    pub b1: CMatrixDto,
    #[serde(rename = "C0")]
    pub c0: CMatrixDto,
    #[serde(rename = "C1")]
    pub c1: CMatrixDto,
    pub tail: Vec<TailEntryFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_b_sum_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_c_sum_bound: Option<f64>,
}

impl ModelFile {
    pub fn from_model(m: &SpectralModel) -> Self {
        Self {
            delta: m.delta,
            a0: cmatrix_to_dto(&m.a0),
            a1: cmatrix_to_dto(&m.a1),
            b0: cmatrix_to_dto(&m.b0),
            b1: cmatrix_to_dto(&m.b1),
            c0: cmatrix_to_dto(&m.c0),
            c1: cmatrix_to_dto(&m.c1),
            tail: m
                .tail
                .iter()
                .map(|t| TailEntryFile {
                    a: complex_to_dto(&t.a),
                    b: t.b.iter().map(complex_to_dto).collect(),
                    c: t.c.iter().map(complex_to_dto).collect(),
                })
                .collect(),
            tail_b_sum_bound: m.tail_b_sum_bound,
            tail_c_sum_bound: m.tail_c_sum_bound,
        }
    }

    pub fn into_model(&self) -> Result<SpectralModel> {
        let a0 = cmatrix_from_dto_free(&self.a0, "A0")?;
        let n0 = a0.nrows();
        let a1 = cmatrix_from_dto_free(&self.a1, "A1")?;
        let n1 = a1.nrows();
        let mut b0 = cmatrix_from_dto_free(&self.b0, "B0")?;
        let mut b1 = cmatrix_from_dto_free(&self.b1, "B1")?;
        let mut c0 = cmatrix_from_dto_free(&self.c0, "C0")?;
        let mut c1 = cmatrix_from_dto_free(&self.c1, "C1")?;
        let tail: Vec<ModalTriple> = self
            .tail
            .iter()
            .map(|t| ModalTriple {
                a: complex_from_dto(&t.a),
                b: t.b.iter().map(complex_from_dto).collect(),
                c: t.c.iter().map(complex_from_dto).collect(),
            })
            .collect();
        // empty blocks serialize as [] and lose their cross dimension
        let n_u = [b0.ncols(), b1.ncols(), tail.first().map(|t| t.b.len()).unwrap_or(0)]
            .into_iter()
            .max()
            .unwrap_or(0);
        let n_y = [c0.nrows(), c1.nrows(), tail.first().map(|t| t.c.len()).unwrap_or(0)]
            .into_iter()
            .max()
            .unwrap_or(0);
        if b0.nrows() == 0 {
            b0 = CMatrix::zeros(0, n_u);
        }
        if b1.nrows() == 0 {
            b1 = CMatrix::zeros(0, n_u);
        }
        if c0.nrows() == 0 {
            c0 = CMatrix::zeros(n_y, n0);
        }
        if c1.nrows() == 0 {
            c1 = CMatrix::zeros(n_y, n1);
        }
        Ok(SpectralModel {
            a0,
            a1,
            b0,
            b1,
            c0,
            c1,
            tail,
            delta: self.delta,
            tail_b_sum_bound: self.tail_b_sum_bound,
            tail_c_sum_bound: self.tail_c_sum_bound,
        })
    }
}

/// Plant description file, tagged by `kind`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PlantFile {
    #[serde(rename = "toy")]
    Toy { n1_dim: usize },
    #[serde(rename = "transport")]
    Transport {
        #[serde(rename = "A")]
        a: RMatrixDto,
        #[serde(rename = "B")]
        b: RMatrixDto,
        #[serde(rename = "Bu")]
        bu: RMatrixDto,
        #[serde(rename = "C")]
        c: RMatrixDto,
        #[serde(rename = "Cy")]
        cy: RMatrixDto,
        h: f64,
    },
    #[serde(rename = "reaction_diffusion")]
    ReactionDiffusion {
        #[serde(rename = "A")]
        a: RMatrixDto,
        #[serde(rename = "B")]
        b: RMatrixDto,
        #[serde(rename = "Bu")]
        bu: RMatrixDto,
        #[serde(rename = "C")]
        c: RMatrixDto,
        #[serde(rename = "Cy")]
        cy: RMatrixDto,
        nu: f64,
        lambda: f64,
    },
}

impl PlantFile {
    pub fn into_plant(&self) -> Result<Option<OdePdePlant>> {
        match self {
            PlantFile::Toy { .. } => Ok(None),
            PlantFile::Transport { a, b, bu, c, cy, h } => Ok(Some(OdePdePlant {
                a: rmatrix_from_dto(a, "A")?,
                b: rmatrix_from_dto(b, "B")?,
                bu: rmatrix_from_dto(bu, "Bu")?,
                c: rmatrix_from_dto(c, "C")?,
                cy: rmatrix_from_dto(cy, "Cy")?,
                kind: PlantKind::Transport { h: *h },
            })),
            PlantFile::ReactionDiffusion { a, b, bu, c, cy, nu, lambda } => {
                Ok(Some(OdePdePlant {
                    a: rmatrix_from_dto(a, "A")?,
                    b: rmatrix_from_dto(b, "B")?,
                    bu: rmatrix_from_dto(bu, "Bu")?,
                    c: rmatrix_from_dto(c, "C")?,
                    cy: rmatrix_from_dto(cy, "Cy")?,
                    kind: PlantKind::ReactionDiffusion { nu: *nu, lambda: *lambda },
                }))
            }
        }
    }
}

/// Pole-set configuration for synthesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainsFile {
    pub controller_poles: Vec<ComplexDto>,
    pub observer_poles: Vec<ComplexDto>,
}

impl GainsFile {
    pub fn controller_poles(&self) -> Vec<C64> {
        self.controller_poles.iter().map(complex_from_dto).collect()
    }
    pub fn observer_poles(&self) -> Vec<C64> {
        self.observer_poles.iter().map(complex_from_dto).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaFile {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFile {
    #[serde(rename = "S_b")]
    pub s_b: f64,
    #[serde(rename = "S_c")]
    pub s_c: f64,
    pub inconclusive: bool,
}

/// Certificate file. `P0`/`P1` extend the base schema so a simulation run
/// can re-evaluate the Lyapunov functional without re-synthesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub eta: EtaFile,
    pub satisfied: bool,
    pub certified_rate: f64,
    pub tail: TailFile,
    pub delta: f64,
    #[serde(rename = "P0")]
    pub p0: CMatrixDto,
    #[serde(rename = "P1")]
    pub p1: CMatrixDto,
}

impl CertificateFile {
    pub fn from_parts(cert: &Certificate, p0: &CMatrix, p1: &CMatrix) -> Self {
        Self {
            alpha: cert.alpha,
            beta: cert.beta,
            gamma: cert.gamma,
            rho: cert.rho,
            eta: EtaFile {
                e0: cert.eta0,
                e1: cert.eta1,
                e2: cert.eta2,
                max: cert.eta,
            },
            satisfied: cert.satisfied,
            certified_rate: cert.certified_rate,
            tail: TailFile {
                s_b: cert.tail_sums.0,
                s_c: cert.tail_sums.1,
                inconclusive: cert.tail_inconclusive,
            },
            delta: cert.delta,
            p0: cmatrix_to_dto(p0),
            p1: cmatrix_to_dto(p1),
        }
    }
}

/// Controller realization file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerFile {
    #[serde(rename = "L")]
    pub l: CMatrixDto,
    #[serde(rename = "M")]
    pub m: CMatrixDto,
    #[serde(rename = "N")]
    pub n: CMatrixDto,
    #[serde(rename = "K")]
    pub k: CMatrixDto,
    pub representation: String,
}

impl ControllerFile {
    pub fn from_controller(c: &ControllerRealization) -> Self {
        Self {
            l: cmatrix_to_dto(&c.l),
            m: cmatrix_to_dto(&c.m),
            n: cmatrix_to_dto(&c.n),
            k: cmatrix_to_dto(&c.k),
            representation: match c.representation {
                Representation::Complex => "complex".into(),
                Representation::RealifiedBlockDiagonal => "realified_block_diagonal".into(),
            },
        }
    }

    pub fn into_controller(&self) -> Result<ControllerRealization> {
        let representation = match self.representation.as_str() {
            "complex" => Representation::Complex,
            "realified_block_diagonal" => Representation::RealifiedBlockDiagonal,
            other => {
                return Err(CoreError::InvalidModel(format!(
                    "unknown controller representation '{other}'"
                )))
            }
        };
        Ok(ControllerRealization {
            l: cmatrix_from_dto_free(&self.l, "L")?,
            m: cmatrix_from_dto_free(&self.m, "M")?,
            n: cmatrix_from_dto_free(&self.n, "N")?,
            k: cmatrix_from_dto_free(&self.k, "K")?,
            representation,
        })
    }
}

/// Perturbation blocks file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UncertaintyFile {
    #[serde(rename = "dA0")]
    pub da0: CMatrixDto,
    #[serde(rename = "dA1")]
    pub da1: CMatrixDto,
    #[serde(rename = "dB0")]
    pub db0: CMatrixDto,
    #[serde(rename = "dB1")]
    pub db1: CMatrixDto,
    #[serde(rename = "dC0")]
    pub dc0: CMatrixDto,
    #[serde(rename = "dC1")]
    pub dc1: CMatrixDto,
}

impl UncertaintyFile {
    pub fn from_spec(u: &UncertaintySpec) -> Self {
        Self {
            da0: cmatrix_to_dto(&u.da0),
            da1: cmatrix_to_dto(&u.da1),
            db0: cmatrix_to_dto(&u.db0),
            db1: cmatrix_to_dto(&u.db1),
            dc0: cmatrix_to_dto(&u.dc0),
            dc1: cmatrix_to_dto(&u.dc1),
        }
    }

    pub fn into_spec(&self) -> Result<UncertaintySpec> {
        Ok(UncertaintySpec::new(
            cmatrix_from_dto_free(&self.da0, "dA0")?,
            cmatrix_from_dto_free(&self.da1, "dA1")?,
            cmatrix_from_dto_free(&self.db0, "dB0")?,
            cmatrix_from_dto_free(&self.db1, "dB1")?,
            cmatrix_from_dto_free(&self.dc0, "dC0")?,
            cmatrix_from_dto_free(&self.dc1, "dC1")?,
        ))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
