#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "epon/sim_core.hpp"

using epon::SimTime;
using epon::sim::Engine;
using epon::sim::EventClass;
using epon::sim::EventKey;

TEST_CASE("same-instant events run in class order, then insertion order") {
  Engine e;
  std::vector<int> order;
  e.schedule(SimTime{10}, EventClass::Timer, [&] { order.push_back(5); });
  e.schedule(SimTime{10}, EventClass::FrameArrival, [&] { order.push_back(3); });
  e.schedule(SimTime{10}, EventClass::CycleBoundary, [&] { order.push_back(0); });
  e.schedule(SimTime{10}, EventClass::FrameArrival, [&] { order.push_back(4); });
  e.schedule(SimTime{10}, EventClass::ReportSlot, [&] { order.push_back(2); });
  e.schedule(SimTime{10}, EventClass::GateDelivery, [&] { order.push_back(1); });
  e.schedule(SimTime{5}, EventClass::Timer, [&] { order.push_back(-1); });
  e.run_until(SimTime{10});
  CHECK(order == std::vector<int>{-1, 0, 1, 2, 3, 4, 5});
}

TEST_CASE("run_until stops at the horizon and advances the clock") {
  Engine e;
  int fired = 0;
  e.schedule(SimTime{100}, EventClass::Timer, [&] { ++fired; });
  e.schedule(SimTime{101}, EventClass::Timer, [&] { ++fired; });
  e.run_until(SimTime{100});
  CHECK(fired == 1);
  CHECK(e.now() == SimTime{100});
  CHECK(e.pending() == 1);
  e.run_until(SimTime{200});
  CHECK(fired == 2);
  CHECK(e.now() == SimTime{200});
}

TEST_CASE("cancelled events never fire") {
  Engine e;
  bool fired = false;
  auto h = e.schedule(SimTime{3}, EventClass::Timer, [&] { fired = true; });
  CHECK(e.cancel(h));
  CHECK_FALSE(e.cancel(h));
  CHECK_FALSE(e.cancel(epon::sim::EventHandle{}));
  e.run_until(SimTime{10});
  CHECK_FALSE(fired);
  CHECK(e.executed() == 0);
}

TEST_CASE("scheduling into the past throws") {
  Engine e;
  e.run_until(SimTime{50});
  CHECK_THROWS_AS(e.schedule(SimTime{49}, EventClass::Timer, [] {}), std::logic_error);
  CHECK_NOTHROW(e.schedule(SimTime{50}, EventClass::Timer, [] {}));
}

TEST_CASE("callbacks may schedule at the current instant") {
  Engine e;
  std::vector<int> order;
  e.schedule(SimTime{7}, EventClass::ReportSlot, [&] {
    order.push_back(1);
    e.schedule(SimTime{7}, EventClass::CycleBoundary, [&] { order.push_back(2); });
  });
  e.run_until(SimTime{7});
  CHECK(order == std::vector<int>{1, 2});
}

TEST_CASE("random schedules execute in strictly increasing key order") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    Engine e;
    e.set_recording(true);
    std::vector<epon::sim::EventHandle> handles;
    int expected = 0;
    for (int i = 0; i < 500; ++i) {
      const SimTime t{static_cast<std::int64_t>(rng() % 50)};
      const auto cls = static_cast<EventClass>(rng() % 6);
      handles.push_back(e.schedule(t, cls, [] {}));
      ++expected;
    }
    for (std::size_t i = 0; i < handles.size(); i += 3) {
      if (e.cancel(handles[i])) --expected;
    }
    const auto trace = e.run_until(SimTime{100});
    CHECK(static_cast<int>(trace.size()) == expected);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i - 1] < trace[i]);
  }
}

TEST_CASE("identical schedules give identical traces") {
  auto run = [] {
    Engine e;
    e.set_recording(true);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      e.schedule(SimTime{static_cast<std::int64_t>(rng() % 20)}, static_cast<EventClass>(rng() % 6), [] {});
    }
    return e.run_until(SimTime{20});
  };
  CHECK(run() == run());
}
