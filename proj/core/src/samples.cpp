#include "gnids/samples.hpp"

#include "gnids/error.hpp"

namespace gnids {

LabeledRecords select_windows(const LabeledRecords& all, std::span<const std::size_t> which) {
  LabeledRecords out;
  for (auto w : which) {
    if (w >= all.windows.size()) throw UsageError("window index out of range");
    const WindowRange r = all.windows[w];
    const std::size_t begin = out.records.size();
    for (std::size_t i = r.begin; i < r.end; ++i) {
      out.records.push_back(all.records[i]);
      out.labels.push_back(all.labels[i]);
    }
    out.windows.push_back({begin, out.records.size()});
    out.window_ids.push_back(all.window_ids.empty() ? static_cast<int>(w) : all.window_ids[w]);
  }
  return out;
}

std::vector<GraphSample> build_samples(const LabeledRecords& data, const Vectorizer& vectorize) {
  if (data.labels.size() != data.records.size()) {
    throw ShapeError("record and label counts differ");
  }
  std::vector<GraphSample> out;
  out.reserve(data.windows.size());
  std::vector<FlowInput> inputs;
  for (std::size_t w = 0; w < data.windows.size(); ++w) {
    const WindowRange r = data.windows[w];
    inputs.clear();
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const auto& rec = data.records[i];
      inputs.push_back({rec.src_ip, rec.dst_ip, vectorize(rec), data.labels[i], i});
    }
    const int id = data.window_ids.empty() ? static_cast<int>(w) : data.window_ids[w];
    out.push_back(make_sample(build_graph(inputs), id));
  }
  return out;
}

LabeledVectors flow_vectors(std::span<const GraphSample> samples, std::size_t class_count) {
  LabeledVectors v;
  v.class_count = class_count;
  for (const auto& s : samples) {
    for (const auto& f : s.graph.flows) {
      v.x.push_back(f.features);
      v.y.push_back(f.label);
    }
  }
  return v;
}

}  // namespace gnids
