// Copyright 2026 The beacon_recon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "beacon_recon/genotype.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

void StripCarriageReturn(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::int8_t ParseGenotypeToken(std::string_view token, std::size_t line_no) {
  if (token == "0") return 0;
  if (token == "1") return 1;
  if (token == "2") return 2;
  if (token == "NA") return kMissing;
  throw Error("invalid genotype value '" + std::string(token) + "' on line " +
              std::to_string(line_no));
}

std::optional<long long> AsInteger(const std::string& s) {
  long long value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

bool PanelLess(const SnpDef& a, const SnpDef& b) {
  if (a.chromosome != b.chromosome) {
    return ChromosomeLess(a.chromosome, b.chromosome);
  }
  return a.position < b.position;
}

}  // namespace

MinorPresenceVector MinorPresence(const Genotype& genotype) {
  MinorPresenceVector bits(genotype.values.size());
  std::transform(genotype.values.begin(), genotype.values.end(), bits.begin(),
                 [](std::int8_t v) -> std::uint8_t { return HasMinorAllele(v); });
  return bits;
}

bool ChromosomeLess(const std::string& a, const std::string& b) {
  const auto na = AsInteger(a);
  const auto nb = AsInteger(b);
  if (na && nb) return *na < *nb;
  if (na) return true;
  if (nb) return false;
  return a < b;
}

PopulationDataset::PopulationDataset(std::vector<SnpDef> panel,
                                     std::vector<Genotype> genotypes,
                                     PhenotypeTable phenotypes)
    : panel_(std::move(panel)),
      genotypes_(std::move(genotypes)),
      phenotypes_(std::move(phenotypes)) {
  std::unordered_set<std::string> ids;
  for (std::size_t j = 0; j < panel_.size(); ++j) {
    const SnpDef& snp = panel_[j];
    if (!ids.insert(snp.id).second) {
      throw Error("duplicate snp id '" + snp.id + "'");
    }
    if (!(snp.maf >= 0.0 && snp.maf <= 0.5)) {
      throw Error("maf of snp '" + snp.id + "' outside [0, 0.5]");
    }
    if (j > 0 && !PanelLess(panel_[j - 1], snp)) {
      throw Error("panel not strictly ordered by (chromosome, position) at '" +
                  snp.id + "'");
    }
  }
  donor_index_.reserve(genotypes_.size());
  for (std::size_t i = 0; i < genotypes_.size(); ++i) {
    const Genotype& g = genotypes_[i];
    if (g.values.size() != panel_.size()) {
      throw Error("genotype of donor '" + g.donor_id +
                  "' does not match panel length");
    }
    for (std::int8_t v : g.values) {
      if (v != kMissing && (v < 0 || v > 2)) {
        throw Error("invalid genotype value for donor '" + g.donor_id + "'");
      }
    }
    if (!donor_index_.emplace(g.donor_id, i).second) {
      throw Error("duplicate donor_id '" + g.donor_id + "'");
    }
  }
  for (const auto& [donor, traits] : phenotypes_) {
    for (const auto& [trait, value] : traits) {
      if (value != 0 && value != 1) {
        throw Error("phenotype '" + trait + "' of donor '" + donor +
                    "' is not binary");
      }
    }
  }
}

std::optional<std::size_t> PopulationDataset::FindDonor(
    const std::string& donor_id) const {
  auto it = donor_index_.find(donor_id);
  if (it == donor_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> PopulationDataset::FindLocus(
    const std::string& chromosome, std::uint64_t position) const {
  SnpDef probe;
  probe.chromosome = chromosome;
  probe.position = position;
  auto it = std::lower_bound(panel_.begin(), panel_.end(), probe, PanelLess);
  if (it == panel_.end() || it->chromosome != chromosome ||
      it->position != position) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - panel_.begin());
}

PopulationDataset PopulationDataset::Subset(
    std::span<const std::size_t> donor_indices) const {
  std::vector<Genotype> rows;
  rows.reserve(donor_indices.size());
  PhenotypeTable phenotypes;
  for (std::size_t i : donor_indices) {
    if (i >= genotypes_.size()) throw Error("donor index out of range");
    rows.push_back(genotypes_[i]);
    auto it = phenotypes_.find(genotypes_[i].donor_id);
    if (it != phenotypes_.end()) phenotypes.insert(*it);
  }
  return PopulationDataset(panel_, std::move(rows), std::move(phenotypes));
}

PopulationDataset PopulationDataset::WithPhenotypes(
    PhenotypeTable phenotypes) const {
  return PopulationDataset(panel_, genotypes_, std::move(phenotypes));
}

PopulationDataset PopulationDataset::WithMafs(
    std::span<const double> mafs) const {
  if (mafs.size() != panel_.size()) throw Error("maf vector length mismatch");
  std::vector<SnpDef> panel = panel_;
  for (std::size_t j = 0; j < panel.size(); ++j) panel[j].maf = mafs[j];
  return PopulationDataset(std::move(panel), genotypes_, phenotypes_);
}

std::vector<double> PopulationDataset::Mafs() const {
  std::vector<double> mafs(panel_.size());
  std::transform(panel_.begin(), panel_.end(), mafs.begin(),
                 [](const SnpDef& s) { return s.maf; });
  return mafs;
}

std::uint64_t PopulationDataset::Fingerprint() const {
  Fnv1a h;
  h.AddValue(panel_.size());
  for (const SnpDef& s : panel_) {
    h.AddString(s.id);
    h.AddString(s.chromosome);
    h.AddValue(s.position);
  }
  h.AddValue(genotypes_.size());
  for (const Genotype& g : genotypes_) {
    h.AddString(g.donor_id);
    h.Add(g.values.data(), g.values.size());
  }
  return h.digest();
}

PopulationDataset ParseGenotypeMatrix(std::istream& text,
                                      std::istream* maf_source) {
  std::string line;
  if (!std::getline(text, line)) throw Error("malformed header: empty input");
  StripCarriageReturn(line);
  const auto header = SplitTabs(line);
  if (header.empty() || header[0] != "snp") {
    throw Error("malformed header: first field must be 'snp'");
  }
  std::vector<SnpDef> panel;
  panel.reserve(header.size() - 1);
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) throw Error("malformed header: empty snp id");
    SnpDef snp;
    snp.id = std::string(header[c]);
    snp.position = c - 1;
    panel.push_back(std::move(snp));
  }

  std::vector<Genotype> rows;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(text, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != panel.size() + 1) {
      throw Error("row length mismatch on line " + std::to_string(line_no));
    }
    Genotype g;
    g.donor_id = std::string(fields[0]);
    if (!seen.insert(g.donor_id).second) {
      throw Error("duplicate donor_id '" + g.donor_id + "'");
    }
    g.values.reserve(panel.size());
    for (std::size_t c = 1; c < fields.size(); ++c) {
      g.values.push_back(ParseGenotypeToken(fields[c], line_no));
    }
    rows.push_back(std::move(g));
  }

  if (maf_source != nullptr) {
    std::unordered_map<std::string, std::size_t> column_of;
    for (std::size_t j = 0; j < panel.size(); ++j) column_of[panel[j].id] = j;
    std::vector<bool> covered(panel.size(), false);
    std::size_t sidecar_line = 0;
    while (std::getline(*maf_source, line)) {
      ++sidecar_line;
      StripCarriageReturn(line);
      if (line.empty()) continue;
      const auto fields = SplitTabs(line);
      if (fields.size() != 4) {
        throw Error("malformed maf sidecar line " +
                    std::to_string(sidecar_line));
      }
      auto it = column_of.find(std::string(fields[0]));
      if (it == column_of.end()) continue;
      SnpDef& snp = panel[it->second];
      snp.chromosome = std::string(fields[1]);
      std::uint64_t position = 0;
      double maf = 0.0;
      auto p = std::from_chars(fields[2].data(),
                               fields[2].data() + fields[2].size(), position);
      auto m = std::from_chars(fields[3].data(),
                               fields[3].data() + fields[3].size(), maf);
      if (p.ec != std::errc() || m.ec != std::errc() || maf < 0.0 ||
          maf > 1.0) {
        throw Error("malformed maf sidecar line " +
                    std::to_string(sidecar_line));
      }
      snp.position = position;
      snp.maf = FoldFrequency(maf);
      covered[it->second] = true;
    }
    for (std::size_t j = 0; j < panel.size(); ++j) {
      if (!covered[j]) {
        throw Error("maf sidecar has no entry for snp '" + panel[j].id + "'");
      }
    }
    std::vector<std::size_t> order(panel.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return PanelLess(panel[a], panel[b]);
                     });
    std::vector<SnpDef> sorted_panel;
    sorted_panel.reserve(panel.size());
    for (std::size_t j : order) sorted_panel.push_back(panel[j]);
    for (Genotype& g : rows) {
      std::vector<std::int8_t> values(order.size());
      for (std::size_t j = 0; j < order.size(); ++j) {
        values[j] = g.values[order[j]];
      }
      g.values = std::move(values);
    }
    return PopulationDataset(std::move(sorted_panel), std::move(rows));
  }

  PopulationDataset unscored(panel, rows);
  for (std::size_t j = 0; j < panel.size(); ++j) {
    // Columns with no observed call keep MAF 0.
    bool observed = std::any_of(rows.begin(), rows.end(), [&](const Genotype& g) {
      return g.values[j] != kMissing;
    });
    panel[j].maf = observed ? ComputeMaf(unscored, j) : 0.0;
  }
  return PopulationDataset(std::move(panel), std::move(rows));
}

void WriteGenotypeMatrix(const PopulationDataset& dataset, std::ostream& out) {
  out << "snp";
  for (const SnpDef& snp : dataset.panel()) out << '\t' << snp.id;
  out << '\n';
  for (const Genotype& g : dataset.genotypes()) {
    out << g.donor_id;
    for (std::int8_t v : g.values) {
      out << '\t';
      if (v == kMissing) {
        out << "NA";
      } else {
        out << static_cast<int>(v);
      }
    }
    out << '\n';
  }
}

void WriteMafSidecar(const PopulationDataset& dataset, std::ostream& out) {
  for (const SnpDef& snp : dataset.panel()) {
    out << snp.id << '\t' << snp.chromosome << '\t' << snp.position << '\t'
        << FormatDouble(snp.maf) << '\n';
  }
}

double ComputeMaf(const PopulationDataset& dataset, std::size_t snp_index) {
  if (snp_index >= dataset.num_snps()) throw Error("snp index out of range");
  std::uint64_t allele_count = 0;
  std::uint64_t observed = 0;
  for (const Genotype& g : dataset.genotypes()) {
    const std::int8_t v = g.values[snp_index];
    if (v == kMissing) continue;
    allele_count += static_cast<std::uint64_t>(v);
    ++observed;
  }
  if (observed == 0) {
    throw Error("all values missing at snp '" +
                dataset.panel()[snp_index].id + "'");
  }
  const double f =
      static_cast<double>(allele_count) / (2.0 * static_cast<double>(observed));
  return std::min(f, 1.0 - f);
}

PopulationDataset GenerateSyntheticPopulation(
    const SyntheticPopulationSpec& spec, std::uint64_t seed) {
  if (spec.block_sizes.size() != spec.per_block_maf.size()) {
    throw Error("inconsistent synthetic spec: block_sizes and per_block_maf "
                "lengths differ");
  }
  if (spec.within_block_agreement < 0.0 || spec.within_block_agreement > 1.0) {
    throw Error("within_block_agreement outside [0, 1]");
  }
  for (double maf : spec.per_block_maf) {
    if (!(maf >= 0.0 && maf <= 0.5)) {
      throw Error("synthetic block maf outside [0, 0.5]");
    }
  }
  const std::size_t num_snps = std::accumulate(
      spec.block_sizes.begin(), spec.block_sizes.end(), std::size_t{0});

  std::vector<SnpDef> panel;
  panel.reserve(num_snps);
  std::vector<std::size_t> block_of;
  block_of.reserve(num_snps);
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
    for (std::size_t k = 0; k < spec.block_sizes[b]; ++k) {
      SnpDef snp;
      snp.id = "snp" + std::to_string(panel.size() + 1);
      snp.chromosome = spec.chromosome;
      snp.position = 1000 * (panel.size() + 1);
      snp.maf = spec.per_block_maf[b];
      panel.push_back(std::move(snp));
      block_of.push_back(b);
    }
  }

  Rng rng(seed);
  std::vector<Genotype> rows;
  rows.reserve(spec.num_donors);
  std::vector<std::uint8_t> latent(spec.block_sizes.size());
  for (std::size_t i = 0; i < spec.num_donors; ++i) {
    Genotype g;
    g.donor_id = spec.donor_prefix + std::to_string(i + 1);
    g.values.resize(num_snps);
    for (std::size_t b = 0; b < latent.size(); ++b) {
      const double maf = spec.per_block_maf[b];
      latent[b] = rng.Bernoulli(1.0 - (1.0 - maf) * (1.0 - maf));
    }
    for (std::size_t j = 0; j < num_snps; ++j) {
      const double maf = panel[j].maf;
      const double carrier = 1.0 - (1.0 - maf) * (1.0 - maf);
      bool present;
      if (rng.Bernoulli(spec.within_block_agreement)) {
        present = latent[block_of[j]] != 0;
      } else {
        present = rng.Bernoulli(carrier);
      }
      std::int8_t value = 0;
      if (present) value = rng.Bernoulli(maf * maf / carrier) ? 2 : 1;
      g.values[j] = value;
    }
    rows.push_back(std::move(g));
  }
  return PopulationDataset(std::move(panel), std::move(rows));
}

}  // namespace beacon_recon
