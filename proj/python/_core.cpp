// Thin bridge: every function takes and returns JSON text so the Python side
// sees exactly the module serialization used by the CLI and the service.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "eucgov/cli/cli.hpp"
#include "eucgov/error.hpp"
#include "eucgov/inventory/inventory.hpp"
#include "eucgov/reporting/kpi.hpp"
#include "eucgov/reporting/render.hpp"
#include "eucgov/risk/model.hpp"
#include "eucgov/risk/triage.hpp"
#include "eucgov/scanner/diff.hpp"
#include "eucgov/scanner/formula.hpp"
#include "eucgov/scanner/metrics.hpp"
#include "eucgov/serialization.hpp"

namespace py = pybind11;
using namespace eucgov;

namespace {

PyObject* g_error = nullptr;

std::string dump(const json& j) { return j.dump(); }

Date date_or_today(const std::string& text) { return text.empty() ? Date::today() : Date::parse(text, "as_of"); }

reporting::Scope scope(bool include_retired) { return reporting::Scope{include_retired}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the eucgov package.";

  g_error = PyErr_NewException("eucgov._core.EucgovError", PyExc_RuntimeError, nullptr);
  m.attr("EucgovError") = py::reinterpret_borrow<py::object>(g_error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(g_error)(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      inst.attr("field") = e.field().empty() ? py::object(py::none()) : py::str(e.field());
      PyErr_SetObject(g_error, inst.ptr());
    }
  });

  m.def("scan", [](const std::string& path) { return dump(scanner::scan_workbook(path)); }, py::arg("path"));

  m.def(
      "nested_if_depth",
      [](const std::string& formula) {
        auto r = scanner::nested_if_depth(formula);
        return py::make_tuple(r.depth, r.balanced);
      },
      py::arg("formula"));

  m.def(
      "diff",
      [](const std::string& baseline, const std::string& current) {
        return dump(scanner::diff_against_baseline(scanner::parse_workbook(baseline), scanner::parse_workbook(current)));
      },
      py::arg("baseline"), py::arg("current"));

  m.def(
      "assess",
      [](const std::string& input) {
        return dump(risk::assess(parse_json(input, "input").get<risk::AssessmentInput>()));
      },
      py::arg("input"));

  m.def(
      "what_if",
      [](const std::string& input, const std::vector<std::string>& toggles) {
        return dump(risk::what_if(parse_json(input, "input").get<risk::AssessmentInput>(), toggles));
      },
      py::arg("input"), py::arg("toggles"));

  m.def(
      "triage",
      [](const std::string& submission) {
        return dump(risk::triage(parse_json(submission, "submission").get<risk::TriageSubmission>()));
      },
      py::arg("submission"));

  m.def(
      "kpi",
      [](const std::string& store, const std::string& as_of, bool include_retired) {
        return dump(reporting::kpi_snapshot(inventory::load_store(store), date_or_today(as_of), scope(include_retired)));
      },
      py::arg("store"), py::arg("as_of") = "", py::arg("include_retired") = false);

  m.def(
      "concentration",
      [](const std::string& store, std::size_t top_k, bool include_retired) {
        return dump(reporting::department_concentration(inventory::load_store(store), top_k, scope(include_retired)));
      },
      py::arg("store"), py::arg("top_k") = 7, py::arg("include_retired") = false);

  m.def(
      "overdue",
      [](const std::string& store, const std::string& as_of) {
        return dump(reporting::overdue_reviews(inventory::load_store(store), date_or_today(as_of)));
      },
      py::arg("store"), py::arg("as_of") = "");

  m.def(
      "unregistered",
      [](const std::string& store) { return dump(reporting::unregistered_amber_red(inventory::load_store(store))); },
      py::arg("store"));

  m.def(
      "list_eucas",
      [](const std::string& store) { return dump(inventory::Inventory(inventory::load_store(store)).list_eucas()); },
      py::arg("store"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args, const std::string& stdin_text) {
        args.insert(args.begin(), "eucgov");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::istringstream in(stdin_text);
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), py::arg("stdin") = "");
}
