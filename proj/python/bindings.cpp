#include <synchro80/backend.hpp>
#include <synchro80/drivers.hpp>
#include <synchro80/errors.hpp>
#include <synchro80/frontend.hpp>
#include <synchro80/hysr.hpp>
#include <synchro80/layout.hpp>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <optional>

namespace py = pybind11;
using namespace synchro80;

namespace
{
Timeout to_timeout(std::optional<double> seconds)
{
    if (!seconds)
    {
        return std::nullopt;
    }
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::duration<double>(*seconds));
}

// Backend plus an optional thread running its loop.
class PyBackend
{
public:
    PyBackend(const BackendConfig &config,
              const std::string &driver,
              const std::map<std::string, std::string> &params)
    {
        std::vector<std::pair<std::string, std::string>> p(params.begin(), params.end());
        backend_ = std::make_unique<Backend>(config, make_driver(driver, p, config));
    }

    void step(std::uint64_t n)
    {
        backend_->step(n);
    }
    std::uint64_t serve_burst(std::optional<double> timeout)
    {
        return backend_->serve_burst(to_timeout(timeout));
    }
    void start()
    {
        if (!thread_)
        {
            thread_ = std::make_unique<BackendThread>(*backend_);
        }
    }
    void stop()
    {
        if (thread_)
        {
            auto t = std::move(thread_);
            t->stop();
        }
        backend_->stop();
    }
    std::uint64_t iteration() const
    {
        return backend_->iteration();
    }
    Status status() const
    {
        return backend_->status();
    }
    const BackendConfig &config() const
    {
        return backend_->config();
    }

private:
    std::unique_ptr<Backend> backend_;
    std::unique_ptr<BackendThread> thread_;
};
}  // namespace

PYBIND11_MODULE(_synchro80, m)
{
    m.doc() = "Shared-memory backends and frontends with bursting mode";
    m.attr("SEGMENT_VERSION") = segment_version;
    m.attr("__version__") = std::to_string(segment_version) + ".0.0";

    static py::exception<Error> base_error(m, "Synchro80Error");
    static std::map<ErrorCode, py::object> errors;
    for (ErrorCode code :
         {ErrorCode::BadDof,          ErrorCode::BadTarget,        ErrorCode::BadMode,
          ErrorCode::BadConfig,       ErrorCode::TrajectoryTooLong, ErrorCode::AlreadyExists,
          ErrorCode::ResourceFailure, ErrorCode::NotFound,         ErrorCode::VersionMismatch,
          ErrorCode::CorruptHeader,   ErrorCode::RingFull,         ErrorCode::NotBurstingMode,
          ErrorCode::WaitTimeout,     ErrorCode::PeerStopped,      ErrorCode::Evicted,
          ErrorCode::NotYet,          ErrorCode::NoObservationYet, ErrorCode::DriverFailure,
          ErrorCode::SegmentFailure,  ErrorCode::FileNotFound,     ErrorCode::FormatError})
    {
        const std::string name(to_string(code));
        errors[code] = py::exception<Error>(m, name.c_str(), base_error.ptr());
    }
    py::register_exception_translator([](std::exception_ptr p) {
        try
        {
            if (p)
                std::rethrow_exception(p);
        }
        catch (const RingFullError &e)
        {
            py::object exc = errors.at(ErrorCode::RingFull)(e.what());
            exc.attr("unsent") = e.unsent();
            PyErr_SetObject(errors.at(ErrorCode::RingFull).ptr(), exc.ptr());
        }
        catch (const Error &e)
        {
            PyErr_SetString(errors.at(e.code()).ptr(), e.what());
        }
    });

    py::enum_<QueuePolicy>(m, "QueuePolicy")
        .value("APPEND", QueuePolicy::APPEND)
        .value("OVERWRITE", QueuePolicy::OVERWRITE);
    py::enum_<SyncMode>(m, "SyncMode")
        .value("NORMAL", SyncMode::NORMAL)
        .value("BURSTING", SyncMode::BURSTING);
    py::enum_<Status>(m, "Status")
        .value("INITIALIZING", Status::INITIALIZING)
        .value("RUNNING", Status::RUNNING)
        .value("STOPPED", Status::STOPPED);

    py::class_<mode::Direct>(m, "Direct").def(py::init<>());
    py::class_<mode::Duration>(m, "Duration")
        .def(py::init<std::uint64_t>(), py::arg("duration_us"))
        .def_readonly("duration_us", &mode::Duration::duration_us);
    py::class_<mode::Speed>(m, "Speed")
        .def(py::init<double>(), py::arg("speed"))
        .def_readonly("speed", &mode::Speed::speed);
    py::class_<mode::Iteration>(m, "Iteration")
        .def(py::init<std::uint64_t>(), py::arg("count"))
        .def_readonly("count", &mode::Iteration::count);

    py::class_<QueueTicket>(m, "QueueTicket")
        .def_readonly("dof", &QueueTicket::dof)
        .def_readonly("position", &QueueTicket::position);

    py::class_<Observation>(m, "Observation")
        .def_readonly("iteration", &Observation::iteration)
        .def_readonly("timestamp_ns", &Observation::timestamp_ns)
        .def_readonly("logical_time_ns", &Observation::logical_time_ns)
        .def_readonly("measured_period_ns", &Observation::measured_period_ns)
        .def_readonly("observed", &Observation::observed)
        .def_readonly("desired", &Observation::desired)
        .def_property_readonly("payload", [](const Observation &o) {
            return py::bytes(reinterpret_cast<const char *>(o.payload.data()), o.payload.size());
        });

    py::class_<BackendConfig>(m, "BackendConfig")
        .def(py::init([](std::string segment_id, std::uint32_t ndof, double frequency_hz,
                         SyncMode mode, std::uint32_t history_capacity,
                         std::uint32_t payload_capacity, std::uint32_t command_ring_capacity) {
                 BackendConfig c;
                 c.segment_id = std::move(segment_id);
                 c.ndof = ndof;
                 c.frequency_hz = frequency_hz;
                 c.mode = mode;
                 c.history_capacity = history_capacity;
                 c.payload_capacity = payload_capacity;
                 c.command_ring_capacity = command_ring_capacity;
                 return c;
             }),
             py::arg("segment_id"), py::arg("ndof") = 1, py::arg("frequency_hz") = 500.0,
             py::arg("mode") = SyncMode::NORMAL, py::arg("history_capacity") = 4096,
             py::arg("payload_capacity") = 0, py::arg("command_ring_capacity") = 1024)
        .def_readonly("segment_id", &BackendConfig::segment_id)
        .def_readonly("ndof", &BackendConfig::ndof)
        .def_readonly("frequency_hz", &BackendConfig::frequency_hz)
        .def_readonly("mode", &BackendConfig::mode)
        .def_readonly("history_capacity", &BackendConfig::history_capacity)
        .def_readonly("payload_capacity", &BackendConfig::payload_capacity)
        .def_readonly("command_ring_capacity", &BackendConfig::command_ring_capacity);

    using Mode = InterpolationMode;
    py::class_<Frontend>(m, "Frontend")
        .def(py::init<const std::string &>(), py::arg("segment_id"))
        .def(
            "add_command",
            [](Frontend &f, std::uint32_t dof, double target, Mode mode, QueuePolicy policy) {
                f.add_command(dof, target, mode, policy);
            },
            py::arg("dof"), py::arg("target"), py::arg("mode") = Mode{mode::Direct{}},
            py::arg("policy") = QueuePolicy::APPEND)
        .def("pulse", &Frontend::pulse)
        .def(
            "pulse_and_wait",
            [](Frontend &f, std::optional<double> timeout) {
                py::gil_scoped_release release;
                f.pulse_and_wait(to_timeout(timeout));
            },
            py::arg("timeout") = py::none())
        .def("latest", &Frontend::latest)
        .def("read", &Frontend::read, py::arg("iteration"))
        .def(
            "wait_for_iteration",
            [](const Frontend &f, std::uint64_t iteration, std::optional<double> timeout) {
                py::gil_scoped_release release;
                return f.wait_for_iteration(iteration, to_timeout(timeout));
            },
            py::arg("iteration"), py::arg("timeout") = py::none())
        .def(
            "burst",
            [](Frontend &f, std::uint64_t n, bool blocking, std::optional<double> timeout) {
                py::gil_scoped_release release;
                f.burst(n, blocking, to_timeout(timeout));
            },
            py::arg("n"), py::arg("blocking") = true, py::arg("timeout") = py::none())
        .def_property_readonly("iteration", &Frontend::iteration)
        .def_property_readonly("staged", &Frontend::staged)
        .def_property_readonly("config", &Frontend::config);

    py::class_<PyBackend>(m, "EmbeddedBackend")
        .def(py::init<const BackendConfig &, const std::string &,
                      const std::map<std::string, std::string> &>(),
             py::arg("config"), py::arg("driver"),
             py::arg("params") = std::map<std::string, std::string>{})
        .def("step", &PyBackend::step, py::arg("n"), py::call_guard<py::gil_scoped_release>())
        .def("serve_burst", &PyBackend::serve_burst, py::arg("timeout") = py::none(),
             py::call_guard<py::gil_scoped_release>())
        .def("start", &PyBackend::start)
        .def("stop", &PyBackend::stop, py::call_guard<py::gil_scoped_release>())
        .def_property_readonly("iteration", &PyBackend::iteration)
        .def_property_readonly("status", &PyBackend::status)
        .def_property_readonly("config", &PyBackend::config);

    m.def(
        "run_hysr_demo",
        [](double duration_s, double real_hz, double env_hz, std::uint32_t sim_steps,
           bool with_sim) {
            HysrOptions o;
            o.duration_s = duration_s;
            o.real_hz = real_hz;
            o.env_hz = env_hz;
            o.sim_steps_per_env_step = sim_steps;
            o.with_sim = with_sim;
            HysrReport r;
            {
                py::gil_scoped_release release;
                r = run_hysr_demo(o);
            }
            py::dict d;
            d["env_steps"] = r.env_steps;
            d["real_iterations"] = r.real_iterations;
            d["sim_iterations"] = r.sim_iterations;
            d["mirror_mismatches"] = r.mirror_mismatches;
            d["real_period_mean_ns"] = r.real_period.mean_ns;
            d["wall_time_s"] = r.wall_time_s;
            return d;
        },
        py::arg("duration_s") = 2.0, py::arg("real_hz") = 500.0, py::arg("env_hz") = 100.0,
        py::arg("sim_steps_per_env_step") = 5, py::arg("with_sim") = true);
}
