// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the core operations: fingerprints, scaffold keys and
// splits, text hashing, bridge training/projection and the retrieval report.
// File-level plumbing (CSV cleaning, EMB1 round trips) is exposed so the
// pipeline can be scripted without the CLI.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <string>
#include <vector>

#include "chembridge/bridge.hpp"
#include "chembridge/data_ingest.hpp"
#include "chembridge/errors.hpp"
#include "chembridge/eval.hpp"
#include "chembridge/fingerprint.hpp"
#include "chembridge/scaffold.hpp"
#include "chembridge/smiles.hpp"
#include "chembridge/text_embed.hpp"

namespace py = pybind11;

namespace {

namespace br = chembridge::bridge;
namespace ev = chembridge::eval;
using MatrixF = br::MatrixF;

chembridge::fp::Fingerprint fp_of(const std::string& smiles, int radius, int nbits) {
  return chembridge::fp::ecfp(chembridge::smiles::parse_smiles(smiles), radius, nbits);
}

py::array_t<uint8_t> ecfp_array(const std::string& smiles, int radius, int nbits) {
  const auto fp = fp_of(smiles, radius, nbits);
  py::array_t<uint8_t> out(nbits);
  auto view = out.mutable_unchecked<1>();
  for (int b = 0; b < nbits; ++b) view(b) = fp.test(static_cast<uint32_t>(b)) ? 1 : 0;
  return out;
}

std::string scaffold_key_of(const std::string& smiles) {
  const auto graph = chembridge::smiles::parse_smiles(smiles);
  return chembridge::scaffold::scaffold_key(chembridge::scaffold::murcko_scaffold(graph)).str();
}

std::pair<std::vector<int>, std::vector<int>> scaffold_split_py(
    const std::vector<std::string>& keys, double test_fraction, uint64_t seed) {
  std::vector<chembridge::scaffold::ScaffoldKey> parsed;
  parsed.reserve(keys.size());
  for (const auto& k : keys) parsed.push_back(chembridge::scaffold::ScaffoldKey::from_str(k));
  auto split = chembridge::scaffold::scaffold_split(parsed, test_fraction, seed);
  return {std::move(split.train_indices), std::move(split.test_indices)};
}

py::dict train_bridge(const MatrixF& mol, const MatrixF& text,
                      const std::vector<std::string>& target_ids, const py::kwargs& kwargs) {
  br::TrainConfig cfg;
  for (const auto& [key, value] : kwargs) {
    const std::string name = py::cast<std::string>(key);
    if (name == "dim") cfg.dim = py::cast<int>(value);
    else if (name == "temperature") cfg.temperature = py::cast<double>(value);
    else if (name == "lr") cfg.lr = py::cast<double>(value);
    else if (name == "weight_decay") cfg.weight_decay = py::cast<double>(value);
    else if (name == "epochs") cfg.epochs = py::cast<int>(value);
    else if (name == "batch_size") cfg.batch_size = py::cast<int>(value);
    else if (name == "hard_negative_beta") cfg.hard_negative_beta = py::cast<double>(value);
    else if (name == "margin") cfg.margin = py::cast<double>(value);
    else if (name == "margin_weight") cfg.margin_weight = py::cast<double>(value);
    else if (name == "seed") cfg.seed = py::cast<uint64_t>(value);
    else throw chembridge::DataError("unknown training option: " + name);
  }
  auto [params, history] = br::train(mol, text, target_ids, cfg);

  py::dict out;
  out["W_T"] = params.W_T;
  out["W_M"] = params.W_M;
  out["loss"] = history.loss;
  out["infonce"] = history.infonce;
  out["margin"] = history.margin;
  return out;
}

std::string eval_report_json(const MatrixF& B_T, const MatrixF& B_M,
                             const std::vector<std::string>& target_ids, int bootstrap_B,
                             uint64_t seed, int min_group, int k_max) {
  return ev::report_to_json(
      ev::build_report(B_T, B_M, target_ids, bootstrap_B, seed, min_group, k_max));
}

py::list dataset_records(const chembridge::ingest::Dataset& ds) {
  py::list out;
  for (const auto& rec : ds.records) {
    py::dict d;
    d["molecule_id"] = rec.molecule_id;
    d["canonical_smiles"] = rec.canonical_smiles;
    d["mechanism"] = rec.mechanism;
    d["target_id"] = rec.target_id;
    d["target_name"] = rec.target_name;
    d["action_type"] = rec.action_type;
    d["drug_name"] = rec.drug_name;
    d["max_phase"] = rec.max_phase;
    d["record_id"] = chembridge::ingest::record_id(rec);
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fingerprint/text alignment toolkit: hashed circular fingerprints, "
            "scaffold splits, contrastive projection heads and retrieval metrics.";

  static py::exception<chembridge::Error> exc_error(m, "Error");
  static py::exception<chembridge::SchemaError> exc_schema(m, "SchemaError", exc_error);
  static py::exception<chembridge::DataError> exc_data(m, "DataError", exc_error);
  static py::exception<chembridge::NumericError> exc_numeric(m, "NumericError", exc_error);
  static py::exception<chembridge::IoError> exc_io(m, "IoError", exc_error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const chembridge::SchemaError& e) {
      py::set_error(exc_schema, e.what());
    } catch (const chembridge::DataError& e) {
      py::set_error(exc_data, e.what());
    } catch (const chembridge::NumericError& e) {
      py::set_error(exc_numeric, e.what());
    } catch (const chembridge::IoError& e) {
      py::set_error(exc_io, e.what());
    } catch (const chembridge::Error& e) {
      py::set_error(exc_error, e.what());
    }
  });

  m.def("ecfp", &ecfp_array, py::arg("smiles"), py::arg("radius") = 2,
        py::arg("nbits") = 2048,
        "Hashed circular fingerprint of a SMILES string as a 0/1 uint8 vector.");
  m.def(
      "tanimoto",
      [](const std::string& a, const std::string& b, int radius, int nbits) {
        return chembridge::fp::tanimoto(fp_of(a, radius, nbits), fp_of(b, radius, nbits));
      },
      py::arg("smiles_a"), py::arg("smiles_b"), py::arg("radius") = 2,
      py::arg("nbits") = 2048, "Tanimoto similarity of two fingerprints.");

  m.def("scaffold_key", &scaffold_key_of, py::arg("smiles"),
        "Ring-system scaffold identity key; '-' for acyclic molecules.");
  m.def("scaffold_split", &scaffold_split_py, py::arg("keys"), py::arg("test_fraction"),
        py::arg("seed"),
        "Group records by scaffold key and assign whole groups to train/test. "
        "Returns (train_indices, test_indices).");
  m.def(
      "random_split",
      [](int n, double test_fraction, uint64_t seed) {
        auto split = chembridge::scaffold::random_split(n, test_fraction, seed);
        return std::make_pair(std::move(split.train_indices), std::move(split.test_indices));
      },
      py::arg("n"), py::arg("test_fraction"), py::arg("seed"),
      "Seeded scaffold-free split. Returns (train_indices, test_indices).");

  m.def(
      "hash_embed",
      [](const std::string& text, int dim) {
        return Eigen::VectorXf(chembridge::embed::hash_embed(text, dim));
      },
      py::arg("text"), py::arg("dim") = 1024,
      "Deterministic signed feature-hashing embedding, L2-normalized.");

  m.def("train_bridge", &train_bridge, py::arg("mol"), py::arg("text"), py::arg("target_ids"),
        "Fit the dual projection heads. Keyword options mirror the CLI training flags "
        "(dim, temperature, lr, weight_decay, epochs, batch_size, hard_negative_beta, "
        "margin, margin_weight, seed). Returns W_T, W_M and per-epoch loss curves.");
  m.def(
      "project",
      [](const MatrixF& W, const MatrixF& X) { return br::project(W, X); }, py::arg("W"),
      py::arg("X"), "Rows of X @ W.T, each L2-normalized.");
  m.def("eval_report_json", &eval_report_json, py::arg("B_T"), py::arg("B_M"),
        py::arg("target_ids"), py::arg("bootstrap_B") = 0, py::arg("seed") = 0,
        py::arg("min_group") = 3, py::arg("k_max") = 50,
        "Retrieval metric suite in both directions, serialized as JSON.");

  m.def(
      "load_dataset",
      [](const std::filesystem::path& path, int min_text_len) {
        return dataset_records(chembridge::ingest::load_dataset(path, min_text_len));
      },
      py::arg("path"), py::arg("min_text_len") = 20,
      "Load and clean a drug-target CSV; returns one dict per surviving record.");
  m.def(
      "read_emb1",
      [](const std::filesystem::path& path) {
        auto m_ = chembridge::embed::read_embedding_file(path);
        return std::make_pair(std::move(m_.row_ids), std::move(m_.values));
      },
      py::arg("path"), "Read an EMB1 (or TSV) embedding file as (ids, matrix).");
  m.def(
      "write_emb1",
      [](const std::filesystem::path& path, const std::vector<std::string>& ids,
         const MatrixF& values) {
        chembridge::embed::EmbeddingMatrix m_;
        if (static_cast<int>(ids.size()) != values.rows())
          throw chembridge::DataError("write_emb1: ids and matrix rows disagree");
        m_.row_ids = ids;
        m_.values = values;
        chembridge::embed::write_emb1(path, m_);
      },
      py::arg("path"), py::arg("ids"), py::arg("values"), "Write an EMB1 embedding file.");

  m.attr("__version__") = "0.1.0";
}
