// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/errors.hpp>
#include <gsck/evaluation.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gsck {

TamperMask
binarize(const ScalarImage &image, double threshold, int viewId) {
    TamperMask mask(image.width, image.height, viewId);
    for (std::size_t p = 0; p < image.values.size(); ++p) {
        mask.labels[p] = image.values[p] >= threshold ? 1 : 0;
    }
    return mask;
}

ViewScore
scoreFromConfusion(const Confusion &c) {
    ViewScore s;
    s.confusion            = c;
    const std::uint64_t den = c.tp + c.fp + c.fn;
    if (den == 0) {
        s.f1  = 1.0;
        s.iou = 1.0;
        return s;
    }
    s.f1  = 2.0 * double(c.tp) / double(2 * c.tp + c.fp + c.fn);
    s.iou = double(c.tp) / double(den);
    return s;
}

ViewScore
score(const TamperMask &pred, const TamperMask &gt) {
    if (pred.width != gt.width || pred.height != gt.height || pred.labels.size() != gt.labels.size()) {
        throw ShapeError("score: prediction is " + std::to_string(pred.width) + "x" +
                         std::to_string(pred.height) + ", ground truth is " +
                         std::to_string(gt.width) + "x" + std::to_string(gt.height));
    }
    Confusion c;
    for (std::size_t p = 0; p < pred.labels.size(); ++p) {
        const bool P = pred.labels[p] != 0;
        const bool G = gt.labels[p] != 0;
        c.tp += P && G;
        c.fp += P && !G;
        c.fn += !P && G;
        c.tn += !P && !G;
    }
    ViewScore s = scoreFromConfusion(c);
    s.viewId    = gt.viewId;
    return s;
}

ScoreReport
summarize(std::vector<ViewScore> views, double threshold) {
    ScoreReport report;
    report.threshold = threshold;
    report.views     = std::move(views);
    if (!report.views.empty()) {
        for (const auto &v : report.views) {
            report.meanF1 += v.f1;
            report.meanIoU += v.iou;
        }
        report.meanF1 /= double(report.views.size());
        report.meanIoU /= double(report.views.size());
    }
    return report;
}

ScoreReport
evaluateViews(const GaussianScene &scene,
              std::span<const Camera> cameras,
              std::span<const TamperMask> gtMasks,
              double threshold) {
    if (cameras.size() != gtMasks.size()) {
        throw ConfigError("evaluateViews: " + std::to_string(cameras.size()) + " cameras but " +
                          std::to_string(gtMasks.size()) + " ground-truth masks");
    }
    const auto r = scene.tamperAsDouble();
    std::vector<ViewScore> scores;
    for (std::size_t j = 0; j < cameras.size(); ++j) {
        if (cameras[j].id != gtMasks[j].viewId) {
            throw ConfigError("evaluateViews: camera/mask view ids are not paired");
        }
        const ScalarImage rendered = renderAttribute(computeBlendWeights(scene, cameras[j]), r);
        scores.push_back(score(binarize(rendered, threshold, cameras[j].id), gtMasks[j]));
    }
    return summarize(std::move(scores), threshold);
}

ScoreReport
evaluateViews(std::span<const BlendWeights> views,
              std::span<const double> r,
              std::span<const TamperMask> gtMasks,
              double threshold) {
    if (views.size() != gtMasks.size()) {
        throw ConfigError("evaluateViews: view and ground-truth counts differ");
    }
    std::vector<ViewScore> scores;
    for (std::size_t j = 0; j < views.size(); ++j) {
        const ScalarImage rendered = renderAttribute(views[j], r);
        scores.push_back(score(binarize(rendered, threshold, gtMasks[j].viewId), gtMasks[j]));
    }
    return summarize(std::move(scores), threshold);
}

ScoreReport
bestOverThresholds(std::span<const BlendWeights> views,
                   std::span<const double> r,
                   std::span<const TamperMask> gtMasks,
                   std::span<const double> thresholds) {
    if (thresholds.empty()) {
        throw ConfigError("bestOverThresholds: no thresholds");
    }
    ScoreReport best;
    bool first = true;
    for (double th : thresholds) {
        ScoreReport rep = evaluateViews(views, r, gtMasks, th);
        if (first || rep.meanF1 > best.meanF1) {
            best  = std::move(rep);
            first = false;
        }
    }
    return best;
}

std::string
reportToJson(const ScoreReport &report) {
    nlohmann::ordered_json doc;
    doc["threshold"] = report.threshold;
    doc["mean_f1"]   = report.meanF1;
    doc["mean_iou"]  = report.meanIoU;
    doc["views"]     = nlohmann::ordered_json::array();
    for (const auto &v : report.views) {
        doc["views"].push_back({{"view_id", v.viewId},
                                {"f1", v.f1},
                                {"iou", v.iou},
                                {"tp", v.confusion.tp},
                                {"fp", v.confusion.fp},
                                {"fn", v.confusion.fn},
                                {"tn", v.confusion.tn}});
    }
    return doc.dump(2);
}

std::string
reportToTable(const ScoreReport &report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %8s %8s %10s %10s %10s %10s\n", "view", "F1", "IoU",
                  "TP", "FP", "FN", "TN");
    out << line;
    for (const auto &v : report.views) {
        std::snprintf(line, sizeof line, "%-6d %8.4f %8.4f %10llu %10llu %10llu %10llu\n",
                      v.viewId, v.f1, v.iou, static_cast<unsigned long long>(v.confusion.tp),
                      static_cast<unsigned long long>(v.confusion.fp),
                      static_cast<unsigned long long>(v.confusion.fn),
                      static_cast<unsigned long long>(v.confusion.tn));
        out << line;
    }
    std::snprintf(line, sizeof line, "%-6s %8.4f %8.4f   (threshold %.3f)\n", "mean",
                  report.meanF1, report.meanIoU, report.threshold);
    out << line;
    return out.str();
}

void
writeReport(const ScoreReport &report,
            const std::filesystem::path &jsonPath,
            const std::filesystem::path &tablePath) {
    auto write = [](const std::filesystem::path &path, const std::string &text) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) {
            throw WriteError(path.string() + ": cannot open for writing");
        }
        out << text;
        if (!text.empty() && text.back() != '\n') {
            out << '\n';
        }
        if (!out) {
            throw WriteError(path.string() + ": write failed");
        }
    };
    write(jsonPath, reportToJson(report));
    write(tablePath, reportToTable(report));
}

} // namespace gsck
