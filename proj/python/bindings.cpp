#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "layoutcot/constraint.hpp"
#include "layoutcot/dataset.hpp"
#include "layoutcot/error.hpp"
#include "layoutcot/html.hpp"
#include "layoutcot/metrics.hpp"
#include "layoutcot/pipeline.hpp"
#include "layoutcot/retrieval.hpp"
#include "layoutcot/svg.hpp"
#include "layoutcot/transport.hpp"

namespace py = pybind11;
namespace lc = layoutcot;

PYBIND11_MODULE(_core, m) {
  m.doc() = "LayoutCoT layout generation engine";

  // The message starts with the error code name, e.g. "EmptyLayout: ...".
  py::register_exception<lc::Error>(m, "LayoutCoTError");

  py::class_<lc::BBox>(m, "BBox")
      .def(py::init<double, double, double, double>(), py::arg("left"), py::arg("top"), py::arg("width"),
           py::arg("height"))
      .def_readwrite("left", &lc::BBox::left)
      .def_readwrite("top", &lc::BBox::top)
      .def_readwrite("width", &lc::BBox::width)
      .def_readwrite("height", &lc::BBox::height)
      .def("area", &lc::BBox::area)
      .def(py::self == py::self)
      .def("__repr__", [](const lc::BBox& b) {
        return "BBox(" + std::to_string(b.left) + ", " + std::to_string(b.top) + ", " + std::to_string(b.width) +
               ", " + std::to_string(b.height) + ")";
      });

  py::class_<lc::Element>(m, "Element")
      .def(py::init([](std::string label, lc::BBox bbox, bool locked) {
             return lc::Element{std::move(label), bbox, locked};
           }),
           py::arg("label"), py::arg("bbox"), py::arg("locked") = false)
      .def_readwrite("label", &lc::Element::label)
      .def_readwrite("bbox", &lc::Element::bbox)
      .def_readwrite("locked", &lc::Element::locked)
      .def(py::self == py::self);

  py::class_<lc::Layout>(m, "Layout")
      .def(py::init([](double width, double height, std::vector<lc::Element> elements, std::string id) {
             lc::Layout l;
             l.id = std::move(id);
             l.canvas.width = width;
             l.canvas.height = height;
             l.elements = std::move(elements);
             return l;
           }),
           py::arg("width"), py::arg("height"), py::arg("elements") = std::vector<lc::Element>{},
           py::arg("id") = "")
      .def_readwrite("id", &lc::Layout::id)
      .def_readwrite("elements", &lc::Layout::elements)
      .def_property_readonly("width", [](const lc::Layout& l) { return l.canvas.width; })
      .def_property_readonly("height", [](const lc::Layout& l) { return l.canvas.height; })
      .def("__len__", [](const lc::Layout& l) { return l.elements.size(); })
      .def(py::self == py::self);

  m.def("normalize", &lc::normalize);
  m.def("denormalize", &lc::denormalize);
  m.def("to_html", [](const lc::Layout& l) { return lc::to_html(l).text; });
  m.def(
      "parse_html",
      [](const std::string& text, std::vector<std::string> vocabulary, bool strict) {
        lc::ParseOptions opts;
        opts.vocabulary = std::move(vocabulary);
        opts.strict = strict;
        return lc::parse_html(text, opts).layout;
      },
      py::arg("text"), py::arg("vocabulary") = std::vector<std::string>{}, py::arg("strict") = false);

  m.def(
      "transport_distance",
      [](const lc::Layout& a, const lc::Layout& b, double geometric, double label) {
        return lc::transport_distance(a, b, lc::CostWeights{geometric, label}).cost;
      },
      py::arg("a"), py::arg("b"), py::arg("geometric") = 0.5, py::arg("label") = 0.5);
  m.def(
      "ltsim",
      [](const lc::Layout& a, const lc::Layout& b, double scale) { return lc::ltsim_score(a, b, {}, scale); },
      py::arg("a"), py::arg("b"), py::arg("scale") = 1.0);

  py::class_<lc::RetrievalIndex>(m, "RetrievalIndex")
      .def_static("load", [](const std::filesystem::path& p) { return lc::load_index(p); })
      .def_static(
          "build",
          [](const std::filesystem::path& records, const std::string& manifest, const std::string& split) {
            return lc::build_index(lc::ingest_file(records, lc::resolve_manifest(manifest)), split);
          },
          py::arg("records"), py::arg("manifest") = "pku", py::arg("split") = "train")
      .def("save", [](const lc::RetrievalIndex& i, const std::filesystem::path& p) { lc::save_index(i, p); })
      .def("__len__", [](const lc::RetrievalIndex& i) { return i.entries.size(); })
      .def_readonly("vocabulary", &lc::RetrievalIndex::vocabulary)
      .def(
          "query",
          [](const lc::RetrievalIndex& index, const lc::Layout& query, std::size_t k, bool exclude_self) {
            lc::RetrievalOptions opts;
            opts.k = k;
            opts.exclude_self = exclude_self;
            std::vector<std::pair<std::string, double>> out;
            for (const auto& h : lc::topk_retrieve(query, index, opts)) out.emplace_back(h.id, h.similarity);
            return out;
          },
          py::arg("query"), py::arg("k") = 10, py::arg("exclude_self") = false);

  m.def("alignment", &lc::alignment);
  m.def("overlap", &lc::overlap, py::arg("layout"), py::arg("exclude_labels") = std::vector<std::string>{});
  m.def("max_iou", &lc::max_iou);
  m.def("underlay_loose", &lc::underlay_loose, py::arg("layout"), py::arg("underlay_label") = "underlay");
  m.def("underlay_strict", &lc::underlay_strict, py::arg("layout"), py::arg("underlay_label") = "underlay");
  m.def("size_reasonableness", [](const std::vector<lc::Layout>& population, std::map<std::string, double> means) {
    return lc::size_reasonableness(population, lc::AreaStats{std::move(means)}).value;
  });

  m.def(
      "render_svg",
      [](const lc::Layout& layout, bool labels) {
        lc::RenderStyle style;
        style.show_labels = labels;
        return lc::render_svg(layout, style);
      },
      py::arg("layout"), py::arg("labels") = true);

  m.def(
      "run_task",
      [](const std::filesystem::path& config, std::optional<std::string> mode,
         std::optional<std::filesystem::path> output_dir) {
        auto cfg = lc::load_run_config(config);
        lc::RunOverrides o;
        if (mode) o.mode = lc::backend_mode_from_string(*mode);
        o.output_dir = output_dir;
        lc::apply_overrides(cfg, o);
        const auto summary = lc::run_task(cfg);
        py::dict metrics;
        for (const auto& e : summary.report.metrics) {
          metrics[py::str(e.name)] = e.value ? py::cast(*e.value) : py::none();
        }
        py::dict out;
        out["output_dir"] = summary.output_dir;
        out["items"] = summary.items;
        out["failures"] = summary.failures;
        out["metrics"] = metrics;
        return out;
      },
      py::arg("config"), py::arg("mode") = py::none(), py::arg("output_dir") = py::none());
}
