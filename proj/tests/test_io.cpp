#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "bell_lab/io.hpp"

using namespace bell_lab;

TEST(Io, EventsRoundTrip) {
  const std::vector<StationEvent> events = {{0, 0, Outcome::up()}, {3, 1, Outcome::none()}, {7, 0, Outcome::down()}};
  std::stringstream ss;
  io::write_events(ss, events);
  EXPECT_EQ(ss.str(), "window_index,setting_label,outcome\n0,0,1\n3,1,0\n7,0,-1\n");
  EXPECT_EQ(io::read_events(ss), events);
}

TEST(Io, TrialsRoundTripWithCrlfAndBlankLines) {
  std::stringstream ss("setting_a,setting_b,a,b\r\n0,1,1,-1\r\n\r\n-1,2,0,1\r\n");
  const auto trials = io::read_trials(ss);
  ASSERT_EQ(trials.size(), 2u);
  EXPECT_EQ(trials[1], (PairedTrial{kNoSetting, 2, Outcome::none(), Outcome::up()}));
  std::stringstream out;
  io::write_trials(out, trials);
  EXPECT_EQ(out.str(), "setting_a,setting_b,a,b\n0,1,1,-1\n-1,2,0,1\n");
}

TEST(Io, SpreadsheetAndBallsRoundTrip) {
  const Spreadsheet4 sheet{{{1, -1, 1, 1}, {-1, -1, 1, -1}}};
  std::stringstream ss;
  io::write_spreadsheet(ss, sheet);
  EXPECT_EQ(io::read_spreadsheet(ss).rows, sheet.rows);

  const std::vector<BallPair> balls = {{1, 0, 0, 1, true}, {0, 1, 1, 1, false}};
  std::stringstream sb;
  io::write_balls(sb, balls);
  EXPECT_EQ(sb.str(), "A0,A3,B0,B2,prepared\n1,0,0,1,1\n0,1,1,1,0\n");
  EXPECT_EQ(io::read_balls(sb), balls);
}

TEST(Io, RoundsAreNumberedFromOne) {
  const std::vector<Round> rounds = {{1, 1, 0, 0, 0, 0, 1}, {2, 2, 0, 1, 1, 1, 1}};
  std::stringstream ss;
  io::write_rounds(ss, rounds);
  EXPECT_EQ(ss.str(), "minute,i,j,x,y,a,b,point\n1,1,1,0,0,0,0,1\n2,2,2,0,1,1,1,1\n");
}

TEST(Io, MalformedContentIsRejected) {
  const std::vector<std::string> bad_trials = {
      "wrong,header\n0,0,1,1\n",
      "setting_a,setting_b,a,b\n0,0,2,1\n",
      "setting_a,setting_b,a,b\n0,0,1\n",
      "setting_a,setting_b,a,b\n0,0,x,1\n",
      "",
  };
  for (const auto& text : bad_trials) {
    std::stringstream ss(text);
    EXPECT_THROW(io::read_trials(ss), io::FormatError) << text;
  }
  std::stringstream sheet("A,Ap,B,Bp\n1,0,1,1\n");
  EXPECT_THROW(io::read_spreadsheet(sheet), io::FormatError);
  std::stringstream balls("A0,A3,B0,B2,prepared\n2,0,0,0,1\n");
  EXPECT_THROW(io::read_balls(balls), io::FormatError);
  std::stringstream events("window_index,setting_label,outcome\n-4,0,1\n");
  EXPECT_THROW(io::read_events(events), io::FormatError);
}

TEST(Io, PeekHeaderLeavesStreamIntact) {
  std::stringstream ss("setting_a,setting_b,a,b\r\n0,0,1,1\n");
  EXPECT_EQ(io::peek_header(ss), std::string(io::kTrialsHeader));
  EXPECT_EQ(io::read_trials(ss).size(), 1u);
}

TEST(Io, DriftingSpecRoundTrip) {
  const auto spec = DriftingDeviceSpec::default_two_regime();
  std::stringstream ss;
  io::write_drifting_spec(ss, spec);
  const auto back = io::read_drifting_spec(ss);
  EXPECT_EQ(back.n_symbols, spec.n_symbols);
  EXPECT_EQ(back.symbol_values, spec.symbol_values);
  EXPECT_EQ(back.runs, spec.runs);
  EXPECT_EQ(back.run_len, spec.run_len);
  ASSERT_EQ(back.regimes.size(), spec.regimes.size());
  for (std::size_t k = 0; k < spec.regimes.size(); ++k) {
    EXPECT_EQ(back.regimes[k].first_run, spec.regimes[k].first_run);
    EXPECT_EQ(back.regimes[k].last_run, spec.regimes[k].last_run);
    EXPECT_EQ(back.regimes[k].probabilities, spec.regimes[k].probabilities);
  }
}

TEST(Io, DriftingSpecParsing) {
  std::stringstream ss(
      "# two symbols\n"
      "n_symbols = 2\n"
      "symbol_values = 1, -1   # per-item values\n"
      "runs = 4\n"
      "run_len = 50\n"
      "regime = 1-4: 0.5, 0.5\n"
      "regime = 2-2: 0, 1\n");
  const auto spec = io::read_drifting_spec(ss);
  EXPECT_NO_THROW(spec.validate());
  EXPECT_EQ(spec.regime_for(1).probabilities, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(spec.regime_for(0).probabilities, (std::vector<double>{0.5, 0.5}));

  for (const char* bad : {"bogus = 1\n", "runs = -3\n", "regime = 0-2: 1\n", "regime = 3-2: 1\n", "runs\n",
                          "symbol_values = 1, x\n"}) {
    std::stringstream b(bad);
    EXPECT_THROW(io::read_drifting_spec(b), io::FormatError) << bad;
  }
}
