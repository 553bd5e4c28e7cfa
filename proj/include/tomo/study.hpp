// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tomo {

/// The four standard screening views, in the canonical concatenation order.
enum class ViewKind { LCC = 0, RCC = 1, LMLO = 2, RMLO = 3 };

inline constexpr std::array<ViewKind, 4> kAllViews{ViewKind::LCC, ViewKind::RCC, ViewKind::LMLO,
                                                   ViewKind::RMLO};

std::string_view to_string(ViewKind view) noexcept;
ViewKind parse_view(std::string_view text);

/// BI-RADS breast composition category. The enumerator value is the ordinal rank.
enum class DensityCategory { A = 0, B = 1, C = 2, D = 3 };

inline constexpr int kDensityClasses = 4;

inline constexpr int rank(DensityCategory c) noexcept { return static_cast<int>(c); }
DensityCategory density_from_rank(int rank);
std::string_view to_string(DensityCategory c) noexcept;
DensityCategory parse_density(std::string_view text);

/// {A,B} -> false (non-dense), {C,D} -> true (dense).
inline constexpr bool is_dense(DensityCategory c) noexcept { return rank(c) >= 2; }

/// Side length of the resized frame every geometry is expressed in.
inline constexpr double kFrameSize = 518.0;

struct VolumeRef {
    std::string patient_id;
    std::string exam_id;
    ViewKind view = ViewKind::LCC;
    int n_slices = 1;
    std::string acquisition_date;

    /// Stable "patient|exam|VIEW" key used by caches and stores.
    std::string key() const;

    friend bool operator==(const VolumeRef&, const VolumeRef&) = default;
};

struct Demographics {
    double age_years = 0.0;
    std::string race;

    friend bool operator==(const Demographics&, const Demographics&) = default;
};

/// Observed outcome used to derive discrete-time survival labels.
struct Outcome {
    bool event = false;
    int event_year = 0;
    double followup_years = 0.0;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Generator-side ground truth recorded by synthetic cohorts.
struct PlantedTruth {
    int density_rank = 0;
    std::array<double, 5> hazard_profile{};

    friend bool operator==(const PlantedTruth&, const PlantedTruth&) = default;
};

struct Exam {
    std::string exam_id;
    std::string patient_id;
    std::map<ViewKind, VolumeRef> views;
    std::optional<Demographics> demographics;
    bool complete = true;
    std::optional<DensityCategory> density;
    std::optional<Outcome> outcome;
    std::optional<std::string> split;
    std::optional<PlantedTruth> planted;

    friend bool operator==(const Exam&, const Exam&) = default;
};

enum class Malignancy { Benign, Cancer };

struct BoxAnnotation {
    VolumeRef volume;
    int slice_index = 0;
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    std::string cls = "lesion";
    std::optional<Malignancy> malignancy;

    friend bool operator==(const BoxAnnotation&, const BoxAnnotation&) = default;
};

struct Dataset {
    std::vector<Exam> exams;
    std::vector<BoxAnnotation> annotations;

    const Exam* find_exam(std::string_view exam_id) const noexcept;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class ViolationKind {
    MissingView,
    ViewMismatch,
    IdMismatch,
    BadSliceCount,
    DuplicateVolume,
    DegenerateBox,
    BoxOutOfFrame,
    SliceOutOfRange,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
    ViolationKind kind;
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks the exam's own invariants plus those of any boxes that belong to it.
/// Violations are returned as data; an empty result means the exam is well formed.
std::vector<Violation> validate_exam(const Exam& exam, std::span<const BoxAnnotation> boxes = {});

std::vector<Violation> validate_box(const BoxAnnotation& box);

/// All exams and annotations, plus (patient, exam, view) uniqueness across the dataset.
std::vector<Violation> validate_dataset(const Dataset& dataset);

/// Maps a box from a raw h x w pixel frame into the 518 x 518 frame using the
/// same scale factors the image resize applies.
BoxAnnotation rescale_to_frame(BoxAnnotation box, int raw_height, int raw_width);

void to_json(nlohmann::json& j, ViewKind v);
void from_json(const nlohmann::json& j, ViewKind& v);
void to_json(nlohmann::json& j, DensityCategory c);
void from_json(const nlohmann::json& j, DensityCategory& c);
void to_json(nlohmann::json& j, const VolumeRef& v);
void from_json(const nlohmann::json& j, VolumeRef& v);
void to_json(nlohmann::json& j, const Demographics& d);
void from_json(const nlohmann::json& j, Demographics& d);
void to_json(nlohmann::json& j, const Outcome& o);
void from_json(const nlohmann::json& j, Outcome& o);
void to_json(nlohmann::json& j, const PlantedTruth& p);
void from_json(const nlohmann::json& j, PlantedTruth& p);
void to_json(nlohmann::json& j, const Exam& e);
void from_json(const nlohmann::json& j, Exam& e);
void to_json(nlohmann::json& j, const BoxAnnotation& b);
void from_json(const nlohmann::json& j, BoxAnnotation& b);
void to_json(nlohmann::json& j, const Dataset& d);
void from_json(const nlohmann::json& j, Dataset& d);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Reads a whole JSON document; Io / Parse errors carry the path.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace tomo
