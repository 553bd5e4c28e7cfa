// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/study.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "tomo/error.hpp"

namespace tomo {

using nlohmann::json;

std::string_view to_string(ViewKind view) noexcept {
    switch (view) {
        case ViewKind::LCC: return "LCC";
        case ViewKind::RCC: return "RCC";
        case ViewKind::LMLO: return "LMLO";
        case ViewKind::RMLO: return "RMLO";
    }
    return "?";
}

ViewKind parse_view(std::string_view text) {
    for (const ViewKind v : kAllViews) {
        if (to_string(v) == text) return v;
    }
    fail(ErrorKind::Parse, "unknown view '" + std::string(text) + "'");
}

DensityCategory density_from_rank(int r) {
    if (r < 0 || r >= kDensityClasses) fail(ErrorKind::Parse, "density rank out of range: " + std::to_string(r));
    return static_cast<DensityCategory>(r);
}

std::string_view to_string(DensityCategory c) noexcept {
    static constexpr std::string_view names[] = {"A", "B", "C", "D"};
    return names[rank(c)];
}

DensityCategory parse_density(std::string_view text) {
    if (text.size() == 1) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
        if (c >= 'A' && c <= 'D') return static_cast<DensityCategory>(c - 'A');
    }
    fail(ErrorKind::Parse, "unknown density category '" + std::string(text) + "'");
}

std::string VolumeRef::key() const {
    return patient_id + "|" + exam_id + "|" + std::string(to_string(view));
}

const Exam* Dataset::find_exam(std::string_view exam_id) const noexcept {
    for (const auto& e : exams) {
        if (e.exam_id == exam_id) return &e;
    }
    return nullptr;
}

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
        case ViolationKind::MissingView: return "MissingView";
        case ViolationKind::ViewMismatch: return "ViewMismatch";
        case ViolationKind::IdMismatch: return "IdMismatch";
        case ViolationKind::BadSliceCount: return "BadSliceCount";
        case ViolationKind::DuplicateVolume: return "DuplicateVolume";
        case ViolationKind::DegenerateBox: return "DegenerateBox";
        case ViolationKind::BoxOutOfFrame: return "BoxOutOfFrame";
        case ViolationKind::SliceOutOfRange: return "SliceOutOfRange";
    }
    return "?";
}

std::vector<Violation> validate_box(const BoxAnnotation& box) {
    std::vector<Violation> out;
    const std::string where = box.volume.key() + "@" + std::to_string(box.slice_index);
    if (!(box.w > 0.0) || !(box.h > 0.0)) {
        out.push_back({ViolationKind::DegenerateBox, where});
    }
    if (!(box.x >= 0.0) || !(box.y >= 0.0) || !(box.x + box.w <= kFrameSize) ||
        !(box.y + box.h <= kFrameSize)) {
        out.push_back({ViolationKind::BoxOutOfFrame, where});
    }
    if (box.slice_index < 0 || box.slice_index >= box.volume.n_slices) {
        out.push_back({ViolationKind::SliceOutOfRange, where});
    }
    return out;
}

std::vector<Violation> validate_exam(const Exam& exam, std::span<const BoxAnnotation> boxes) {
    std::vector<Violation> out;
    if (exam.complete) {
        for (const ViewKind v : kAllViews) {
            if (!exam.views.contains(v)) out.push_back({ViolationKind::MissingView, std::string(to_string(v))});
        }
    }
    for (const auto& [view, ref] : exam.views) {
        if (ref.view != view) {
            out.push_back({ViolationKind::ViewMismatch, std::string(to_string(view))});
        }
        if (ref.exam_id != exam.exam_id || ref.patient_id != exam.patient_id) {
            out.push_back({ViolationKind::IdMismatch, ref.key()});
        }
        if (ref.n_slices < 1) out.push_back({ViolationKind::BadSliceCount, ref.key()});
    }
    for (const auto& box : boxes) {
        if (box.volume.exam_id != exam.exam_id) continue;
        auto v = validate_box(box);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

std::vector<Violation> validate_dataset(const Dataset& dataset) {
    std::vector<Violation> out;
    std::set<std::tuple<std::string, std::string, ViewKind>> seen;
    for (const auto& exam : dataset.exams) {
        auto v = validate_exam(exam, dataset.annotations);
        out.insert(out.end(), v.begin(), v.end());
        for (const auto& [view, ref] : exam.views) {
            if (!seen.emplace(ref.patient_id, ref.exam_id, ref.view).second) {
                out.push_back({ViolationKind::DuplicateVolume, ref.key()});
            }
        }
    }
    // Boxes whose exam is absent from the manifest are still checked on their own.
    for (const auto& box : dataset.annotations) {
        if (dataset.find_exam(box.volume.exam_id) == nullptr) {
            auto v = validate_box(box);
            out.insert(out.end(), v.begin(), v.end());
        }
    }
    return out;
}

BoxAnnotation rescale_to_frame(BoxAnnotation box, int raw_height, int raw_width) {
    const double sx = kFrameSize / raw_width;
    const double sy = kFrameSize / raw_height;
    box.x *= sx;
    box.w *= sx;
    box.y *= sy;
    box.h *= sy;
    return box;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(json& j, ViewKind v) { j = std::string(to_string(v)); }
void from_json(const json& j, ViewKind& v) { v = parse_view(j.get<std::string>()); }
void to_json(json& j, DensityCategory c) { j = std::string(to_string(c)); }
void from_json(const json& j, DensityCategory& c) { c = parse_density(j.get<std::string>()); }

void to_json(json& j, const VolumeRef& v) {
    j = json{{"patient_id", v.patient_id},
             {"exam_id", v.exam_id},
             {"view", v.view},
             {"n_slices", v.n_slices},
             {"acquisition_date", v.acquisition_date}};
}

void from_json(const json& j, VolumeRef& v) {
    j.at("patient_id").get_to(v.patient_id);
    j.at("exam_id").get_to(v.exam_id);
    j.at("view").get_to(v.view);
    j.at("n_slices").get_to(v.n_slices);
    v.acquisition_date = j.value("acquisition_date", std::string{});
}

void to_json(json& j, const Demographics& d) { j = json{{"age_years", d.age_years}, {"race", d.race}}; }

void from_json(const json& j, Demographics& d) {
    j.at("age_years").get_to(d.age_years);
    d.race = j.value("race", std::string{});
}

void to_json(json& j, const Outcome& o) {
    j = json{{"event", o.event}, {"event_year", o.event_year}, {"followup_years", o.followup_years}};
}

void from_json(const json& j, Outcome& o) {
    j.at("event").get_to(o.event);
    o.event_year = j.value("event_year", 0);
    j.at("followup_years").get_to(o.followup_years);
}

void to_json(json& j, const PlantedTruth& p) {
    j = json{{"density_rank", p.density_rank}, {"hazard_profile", p.hazard_profile}};
}

void from_json(const json& j, PlantedTruth& p) {
    j.at("density_rank").get_to(p.density_rank);
    j.at("hazard_profile").get_to(p.hazard_profile);
}

void to_json(json& j, const Exam& e) {
    j = json{{"exam_id", e.exam_id}, {"patient_id", e.patient_id}, {"complete", e.complete}};
    json views = json::object();
    for (const auto& [view, ref] : e.views) views[std::string(to_string(view))] = ref;
    j["views"] = std::move(views);
    if (e.demographics) j["demographics"] = *e.demographics;
    if (e.density) j["density"] = *e.density;
    if (e.outcome) j["outcome"] = *e.outcome;
    if (e.split) j["split"] = *e.split;
    if (e.planted) j["planted"] = *e.planted;
}

void from_json(const json& j, Exam& e) {
    j.at("exam_id").get_to(e.exam_id);
    j.at("patient_id").get_to(e.patient_id);
    e.complete = j.value("complete", true);
    e.views.clear();
    for (const auto& [name, ref] : j.at("views").items()) e.views.emplace(parse_view(name), ref.get<VolumeRef>());
    e.demographics = j.contains("demographics") ? std::optional(j["demographics"].get<Demographics>()) : std::nullopt;
    e.density = j.contains("density") ? std::optional(j["density"].get<DensityCategory>()) : std::nullopt;
    e.outcome = j.contains("outcome") ? std::optional(j["outcome"].get<Outcome>()) : std::nullopt;
    e.split = j.contains("split") ? std::optional(j["split"].get<std::string>()) : std::nullopt;
    e.planted = j.contains("planted") ? std::optional(j["planted"].get<PlantedTruth>()) : std::nullopt;
}

void to_json(json& j, const BoxAnnotation& b) {
    j = json{{"volume", b.volume}, {"slice_index", b.slice_index}, {"x", b.x}, {"y", b.y},
             {"w", b.w}, {"h", b.h}, {"class", b.cls}};
    if (b.malignancy) j["malignancy"] = *b.malignancy == Malignancy::Cancer ? "cancer" : "benign";
}

void from_json(const json& j, BoxAnnotation& b) {
    j.at("volume").get_to(b.volume);
    j.at("slice_index").get_to(b.slice_index);
    j.at("x").get_to(b.x);
    j.at("y").get_to(b.y);
    j.at("w").get_to(b.w);
    j.at("h").get_to(b.h);
    b.cls = j.value("class", std::string("lesion"));
    b.malignancy.reset();
    if (j.contains("malignancy") && !j["malignancy"].is_null()) {
        const auto m = j["malignancy"].get<std::string>();
        if (m == "cancer") b.malignancy = Malignancy::Cancer;
        else if (m == "benign") b.malignancy = Malignancy::Benign;
        else fail(ErrorKind::Parse, "unknown malignancy '" + m + "'");
    }
}

void to_json(json& j, const Dataset& d) { j = json{{"exams", d.exams}, {"annotations", d.annotations}}; }

void from_json(const json& j, Dataset& d) {
    j.at("exams").get_to(d.exams);
    d.annotations = j.value("annotations", std::vector<BoxAnnotation>{});
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    static std::atomic<unsigned long> counter{0};
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) fail(ErrorKind::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::Io, "rename to " + path.string() + ": " + ec.message());
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    write_file_atomic(path, doc.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& path) {
    const json doc = read_json_file(path);
    try {
        return doc.get<Dataset>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    write_json_file(path, json(dataset));
}

}  // namespace tomo
