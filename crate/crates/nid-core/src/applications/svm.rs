//! Soft-margin RBF-kernel classifier trained by sequential minimal
//! optimization, sized for small anchor-vector problems (tens of points).
//! Kernel width and error cost are chosen from a fixed log grid by
//! stratified cross-validation; fold shuffling is the only random input,
//! so training is deterministic given the seed.

use std::path::Path;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AnchorVectorSet, AppError};

const MODEL_HEADER: &str = "NWD-SVM-MODEL v1";
const FINGERPRINT_ESCAPE: &AsciiSet = &CONTROLS.add(b'%');
const SMO_TOL: f64 = 1e-3;
const MAX_SWEEPS: usize = 500;

/// Hyperparameter grid: width γ ∈ {2^-6 … 2^4}, cost C ∈ {2^-2 … 2^8}.
fn gamma_grid() -> Vec<f64> {
    (-6..=4).map(|e| 2f64.powi(e)).collect()
}

fn cost_grid() -> Vec<f64> {
    (-2..=8).map(|e| 2f64.powi(e)).collect()
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * sq).exp()
}

fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

struct SmoModel {
    alphas: Vec<f64>,
    bias: f64,
}

/// Platt-style SMO on a precomputed kernel. The second index is always
/// the maximal |E_i − E_j| violator, so the run is deterministic.
fn smo_train(kernel: &[Vec<f64>], ys: &[f64], cost: f64) -> SmoModel {
    let m = ys.len();
    let mut alphas = vec![0.0f64; m];
    let mut bias = 0.0f64;

    let eval = |alphas: &[f64], bias: f64, idx: usize| -> f64 {
        let mut f = bias;
        for j in 0..m {
            if alphas[j] != 0.0 {
                f += alphas[j] * ys[j] * kernel[j][idx];
            }
        }
        f
    };

    for _sweep in 0..MAX_SWEEPS {
        let mut changed = 0usize;
        for i in 0..m {
            let ei = eval(&alphas, bias, i) - ys[i];
            let ri = ys[i] * ei;
            if !((ri < -SMO_TOL && alphas[i] < cost) || (ri > SMO_TOL && alphas[i] > 0.0)) {
                continue;
            }
            // Deterministic second choice: maximal error gap, lowest index
            // on ties.
            let mut j_best = usize::MAX;
            let mut gap_best = -1.0;
            for j in 0..m {
                if j == i {
                    continue;
                }
                let gap = (ei - (eval(&alphas, bias, j) - ys[j])).abs();
                if gap > gap_best {
                    gap_best = gap;
                    j_best = j;
                }
            }
            if j_best == usize::MAX {
                continue;
            }
            let j = j_best;
            let ej = eval(&alphas, bias, j) - ys[j];
            let (ai_old, aj_old) = (alphas[i], alphas[j]);
            let (yi, yj) = (ys[i], ys[j]);
            let s = yi * yj;
            let (lo, hi) = if (yi - yj).abs() > f64::EPSILON {
                ((aj_old - ai_old).max(0.0), (cost + aj_old - ai_old).min(cost))
            } else {
                ((ai_old + aj_old - cost).max(0.0), (ai_old + aj_old).min(cost))
            };
            if hi - lo < 1e-12 {
                continue;
            }
            let eta = 2.0 * kernel[i][j] - kernel[i][i] - kernel[j][j];
            let aj_new = if eta < 0.0 {
                (aj_old - yj * (ei - ej) / eta).clamp(lo, hi)
            } else {
                // Flat direction: move to the endpoint with the lower
                // objective, if one is strictly lower.
                let f1 = yi * (ei + bias) - ai_old * kernel[i][i] - s * aj_old * kernel[i][j];
                let f2 = yj * (ej + bias) - s * ai_old * kernel[i][j] - aj_old * kernel[j][j];
                let l1 = ai_old + s * (aj_old - lo);
                let h1 = ai_old + s * (aj_old - hi);
                let psi_lo = l1 * f1
                    + lo * f2
                    + 0.5 * l1 * l1 * kernel[i][i]
                    + 0.5 * lo * lo * kernel[j][j]
                    + s * lo * l1 * kernel[i][j];
                let psi_hi = h1 * f1
                    + hi * f2
                    + 0.5 * h1 * h1 * kernel[i][i]
                    + 0.5 * hi * hi * kernel[j][j]
                    + s * hi * h1 * kernel[i][j];
                if psi_lo < psi_hi - 1e-7 {
                    lo
                } else if psi_hi < psi_lo - 1e-7 {
                    hi
                } else {
                    continue;
                }
            };
            if (aj_new - aj_old).abs() < 1e-7 {
                continue;
            }
            let ai_new = ai_old + s * (aj_old - aj_new);
            alphas[i] = ai_new;
            alphas[j] = aj_new;
            let b1 = bias - ei - yi * (ai_new - ai_old) * kernel[i][i]
                - yj * (aj_new - aj_old) * kernel[i][j];
            let b2 = bias - ej - yi * (ai_new - ai_old) * kernel[i][j]
                - yj * (aj_new - aj_old) * kernel[j][j];
            bias = if ai_new > 0.0 && ai_new < cost {
                b1
            } else if aj_new > 0.0 && aj_new < cost {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            changed += 1;
        }
        if changed == 0 {
            break;
        }
    }
    SmoModel { alphas, bias }
}

/// A trained soft-margin RBF classifier.
#[derive(Clone, Debug)]
pub struct TrainedClassifier {
    pub gamma: f64,
    pub cost: f64,
    support_vectors: Vec<Vec<f64>>,
    /// `α_i · y_i` per support vector.
    coefficients: Vec<f64>,
    bias: f64,
    /// Majority training label; the prediction when no support vectors
    /// survive (degenerate data).
    majority: i8,
    data_fingerprint: String,
    pub seed: u64,
    pub cv_accuracy: f64,
}

impl TrainedClassifier {
    pub fn predict_vector(&self, v: &[f64]) -> i8 {
        if self.support_vectors.is_empty() {
            return self.majority;
        }
        let mut f = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            f += coef * rbf(self.gamma, sv, v);
        }
        sign(f)
    }

    pub fn data_fingerprint(&self) -> &str {
        &self.data_fingerprint
    }

    /// Versioned text serialization; floats carry 17 significant digits
    /// and round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MODEL_HEADER);
        out.push('\n');
        out.push_str(&format!("gamma {:.17e}\n", self.gamma));
        out.push_str(&format!("cost {:.17e}\n", self.cost));
        out.push_str(&format!("bias {:.17e}\n", self.bias));
        out.push_str(&format!("seed {}\n", self.seed));
        out.push_str(&format!("cv_accuracy {:.17e}\n", self.cv_accuracy));
        out.push_str(&format!("majority {}\n", self.majority));
        out.push_str(&format!(
            "fingerprint {}\n",
            utf8_percent_encode(&self.data_fingerprint, FINGERPRINT_ESCAPE)
        ));
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            let comps: Vec<String> = sv.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&format!("sv {:.17e}\t{}\n", coef, comps.join("\t")));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, AppError> {
        let bad = |line: usize, reason: &str| AppError::ModelParse {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty model"))?;
        if header != MODEL_HEADER {
            return Err(bad(1, "missing NWD-SVM-MODEL v1 header"));
        }
        let mut gamma = None;
        let mut cost = None;
        let mut bias = None;
        let mut seed = None;
        let mut cv_accuracy = None;
        let mut majority = None;
        let mut fingerprint = None;
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let (key, rest) = line
                .split_once(' ')
                .ok_or_else(|| bad(lineno, "expected `key value`"))?;
            let parse_f = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| bad(lineno, "bad float"))
            };
            match key {
                "gamma" => gamma = Some(parse_f(rest)?),
                "cost" => cost = Some(parse_f(rest)?),
                "bias" => bias = Some(parse_f(rest)?),
                "cv_accuracy" => cv_accuracy = Some(parse_f(rest)?),
                "seed" => {
                    seed = Some(rest.parse::<u64>().map_err(|_| bad(lineno, "bad seed"))?)
                }
                "majority" => {
                    majority = Some(match rest {
                        "1" => 1i8,
                        "-1" => -1i8,
                        _ => return Err(bad(lineno, "majority must be 1 or -1")),
                    })
                }
                "fingerprint" => {
                    fingerprint = Some(
                        percent_decode_str(rest)
                            .decode_utf8()
                            .map_err(|_| bad(lineno, "bad fingerprint encoding"))?
                            .into_owned(),
                    )
                }
                "sv" => {
                    let mut fields = rest.split('\t');
                    let coef = parse_f(fields.next().ok_or_else(|| bad(lineno, "empty sv"))?)?;
                    let comps: Vec<f64> = fields.map(parse_f).collect::<Result<_, _>>()?;
                    if comps.is_empty() {
                        return Err(bad(lineno, "support vector has no components"));
                    }
                    coefficients.push(coef);
                    support_vectors.push(comps);
                }
                other => return Err(bad(lineno, &format!("unknown key {other:?}"))),
            }
        }
        Ok(TrainedClassifier {
            gamma: gamma.ok_or_else(|| bad(0, "missing gamma"))?,
            cost: cost.ok_or_else(|| bad(0, "missing cost"))?,
            support_vectors,
            coefficients,
            bias: bias.ok_or_else(|| bad(0, "missing bias"))?,
            majority: majority.ok_or_else(|| bad(0, "missing majority"))?,
            data_fingerprint: fingerprint.ok_or_else(|| bad(0, "missing fingerprint"))?,
            seed: seed.ok_or_else(|| bad(0, "missing seed"))?,
            cv_accuracy: cv_accuracy.ok_or_else(|| bad(0, "missing cv_accuracy"))?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), AppError> {
        std::fs::write(path, self.to_text()).map_err(|source| AppError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|source| AppError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Advisory bound: more than one anchor dimension per ten training
    /// samples tends to overfit.
    pub fn dimension_warning(dims: usize, samples: usize) -> Option<String> {
        if dims * 10 > samples {
            Some(format!(
                "{dims} anchor dimensions exceed one tenth of {samples} training samples"
            ))
        } else {
            None
        }
    }
}

/// Stratified fold assignment: each class is shuffled with the seeded rng
/// and dealt round-robin.
fn stratified_folds(labels: &[i8], folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut assignment = vec![0usize; labels.len()];
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        for (k, &i) in idx.iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    assignment
}

fn fit(xs: &[Vec<f64>], ys: &[f64], gamma: f64, cost: f64) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let m = xs.len();
    let mut kernel = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let k = rbf(gamma, &xs[i], &xs[j]);
            kernel[i][j] = k;
            kernel[j][i] = k;
        }
    }
    let model = smo_train(&kernel, ys, cost);
    let mut svs = Vec::new();
    let mut coefs = Vec::new();
    for i in 0..m {
        if model.alphas[i] > 1e-8 {
            svs.push(xs[i].clone());
            coefs.push(model.alphas[i] * ys[i]);
        }
    }
    (svs, coefs, model.bias)
}

fn predict_raw(
    svs: &[Vec<f64>],
    coefs: &[f64],
    bias: f64,
    gamma: f64,
    majority: i8,
    v: &[f64],
) -> i8 {
    if svs.is_empty() {
        return majority;
    }
    let mut f = bias;
    for (sv, c) in svs.iter().zip(coefs) {
        f += c * rbf(gamma, sv, v);
    }
    sign(f)
}

/// Trains the classifier on a labeled anchor-vector set. Width and cost
/// come from the fixed grid by stratified `cv_folds`-fold accuracy; ties
/// prefer the smaller cost, then the larger width.
pub fn train_classifier(
    avs: &AnchorVectorSet,
    cv_folds: usize,
    seed: u64,
) -> Result<TrainedClassifier, AppError> {
    let labels = avs.labels().ok_or(AppError::BadLabels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos < 3 || neg < 3 {
        return Err(AppError::DegenerateLabels { pos, neg });
    }
    let folds = cv_folds.max(2).min(pos.min(neg));
    let xs = avs.vectors();
    let ys: Vec<f64> = labels.iter().map(|&l| l as f64).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fold_of = stratified_folds(labels, folds, &mut rng);

    let mut best: Option<(usize, f64, f64)> = None; // (correct, cost, gamma)
    for &cost in &cost_grid() {
        for &gamma in &gamma_grid() {
            let mut correct = 0usize;
            for fold in 0..folds {
                let train_idx: Vec<usize> =
                    (0..xs.len()).filter(|&i| fold_of[i] != fold).collect();
                let test_idx: Vec<usize> = (0..xs.len()).filter(|&i| fold_of[i] == fold).collect();
                if train_idx.is_empty() || test_idx.is_empty() {
                    continue;
                }
                let txs: Vec<Vec<f64>> = train_idx.iter().map(|&i| xs[i].clone()).collect();
                let tys: Vec<f64> = train_idx.iter().map(|&i| ys[i]).collect();
                let maj = sign(tys.iter().sum::<f64>());
                let (svs, coefs, bias) = fit(&txs, &tys, gamma, cost);
                for &i in &test_idx {
                    if predict_raw(&svs, &coefs, bias, gamma, maj, &xs[i]) == labels[i] {
                        correct += 1;
                    }
                }
            }
            let better = match best {
                None => true,
                Some((bc, bcost, bgamma)) => {
                    correct > bc
                        || (correct == bc && (cost < bcost || (cost == bcost && gamma > bgamma)))
                }
            };
            if better {
                best = Some((correct, cost, gamma));
            }
        }
    }
    let (correct, cost, gamma) = best.expect("grid is non-empty");
    let majority = sign(ys.iter().sum::<f64>());
    let (support_vectors, coefficients, bias) = fit(xs, &ys, gamma, cost);
    Ok(TrainedClassifier {
        gamma,
        cost,
        support_vectors,
        coefficients,
        bias,
        majority,
        data_fingerprint: avs.data_fingerprint(),
        seed,
        cv_accuracy: correct as f64 / xs.len() as f64,
    })
}

/// Applies a trained model to (unlabeled) anchor vectors. The vectors
/// must come from the same anchors and distance backend the model was
/// trained with; the fingerprint makes that check explicit.
pub fn classify(c: &TrainedClassifier, avs: &AnchorVectorSet) -> Result<Vec<i8>, AppError> {
    if c.data_fingerprint != avs.data_fingerprint() {
        return Err(AppError::FingerprintMismatch {
            expected: c.data_fingerprint.clone(),
            actual: avs.data_fingerprint(),
        });
    }
    Ok(avs.vectors().iter().map(|v| c.predict_vector(v)).collect())
}
