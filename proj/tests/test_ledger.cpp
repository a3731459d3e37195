#include <doctest.h>

#include "qnet/errors.hpp"
#include "qnet/ledger.hpp"
#include "qnet/trace.hpp"

using namespace qnet;

TEST_CASE("species keys normalize parties") {
    SpeciesKey qq = stock_key("[qq]", {3, 1});
    CHECK(qq.parties == std::vector<NodeId>{1, 3});
    CHECK(!qq.directed);
    CHECK(qq == stock_key("[qq]", {1, 3}));

    SpeciesKey ch = channel_key("[c->c]", 2, 0);
    CHECK(ch.directed);
    CHECK(ch.parties == std::vector<NodeId>{2, 0});  // order preserved
    CHECK(!(ch == channel_key("[c->c]", 0, 2)));

    CHECK(species_to_string(qq) == "[qq] P1P3");
    CHECK(species_to_string(ch) == "[c->c] P2->P0");
}

TEST_CASE("credit and debit move balances") {
    Ledger led;
    SpeciesKey qq = stock_key("[qq]", {0, 1});
    led.credit(qq, 2, 0);
    CHECK(led.balance(qq) == 2);
    led.debit(qq, 1, 1);
    CHECK(led.balance(qq) == 1);
    CHECK(led.consumed_totals().at(qq) == 1);
    CHECK(led.credited_totals().at(qq) == 2);
    CHECK(led.replay_consistent());

    CHECK_THROWS_AS(led.debit(qq, 5, 2), SemanticError);
    CHECK(led.balance(qq) == 1);  // failed debit leaves no trace
    CHECK(led.balance(stock_key("[qq]", {4, 5})) == 0);
}

TEST_CASE("infinite species draw implicit credits") {
    Ledger led;
    SpeciesKey qq = stock_key("[qq]", {0, 1});
    led.mark_infinite(qq);
    CHECK(led.is_infinite(qq));

    led.debit(qq, 3, 7);
    CHECK(led.balance(qq) == 0);
    REQUIRE(led.history().size() == 2);
    CHECK(led.history()[0].amount == 3);  // implicit draw
    CHECK(led.history()[0].event == 7);   // linked to the same event
    CHECK(led.history()[1].amount == -3);
    CHECK(led.consumed_totals().at(qq) == 3);
    CHECK(led.replay_consistent());
}

TEST_CASE("species report renders sorted nonzero balances") {
    Ledger led;
    led.credit(stock_key("[qq]", {0, 1}), 2, 0);
    led.credit(stock_key("GHZ", {0, 1, 2}), 1, 1);
    led.credit(channel_key("[c->c]", 1, 0), 4, 2);
    led.credit(stock_key("[cc]", {0, 1}), 1, 3);
    led.debit(stock_key("[cc]", {0, 1}), 1, 4);  // zeroed out, omitted

    // map order: plain labels sort before the bracketed ones
    CHECK(led.species_report() == "((1,GHZ,P0P1P2),(4,[c->c],P1->P0),(2,[qq],P0P1))");

    Ledger empty;
    CHECK(empty.species_report() == "()");
}

TEST_CASE("channel uses meter post-consumption sends by kind and direction") {
    CausalTrace t;
    auto send = [&](NodeId from, NodeId to, ChannelKind ch, bool post, long long units) {
        Event s;
        s.node = from;
        s.kind = EventKind::Send;
        s.channel = ch;
        s.post_consumption = post;
        s.units = units;
        EventId sid = t.record(std::move(s));
        Event r;
        r.node = to;
        r.kind = EventKind::Receive;
        r.channel = ch;
        r.post_consumption = post;
        r.units = units;
        r.causes = {sid};
        t.record(std::move(r));
    };

    send(0, 1, ChannelKind::Classical, true, 1);
    send(0, 1, ChannelKind::Classical, true, 1);
    send(1, 0, ChannelKind::Classical, true, 1);   // opposite direction, separate key
    send(0, 1, ChannelKind::Quantum, true, 2);
    send(0, 1, ChannelKind::Classical, false, 1);  // resource distribution, not metered

    auto uses = channel_uses(t);
    CHECK(uses.at(channel_key("[c->c]", 0, 1)) == 2);
    CHECK(uses.at(channel_key("[c->c]", 1, 0)) == 1);
    CHECK(uses.at(channel_key("[q->q]", 0, 1)) == 2);
    CHECK(uses.size() == 3);
}

TEST_CASE("inequality checking demands an exact match") {
    CausalTrace t;
    Event s;
    s.node = 0;
    s.kind = EventKind::Send;
    s.channel = ChannelKind::Classical;
    s.post_consumption = true;
    s.units = 2;
    EventId sid = t.record(std::move(s));
    Event r;
    r.node = 1;
    r.kind = EventKind::Receive;
    r.channel = ChannelKind::Classical;
    r.post_consumption = true;
    r.units = 2;
    r.causes = {sid};
    t.record(std::move(r));

    Ledger led;
    SpeciesKey qq = stock_key("[qq]", {0, 1});
    led.credit(qq, 1, 0);
    led.debit(qq, 1, 1);

    ResourceInequality ineq;
    ineq.consumed = {{qq, 1}, {channel_key("[c->c]", 0, 1), 2}};
    ineq.produced = {{channel_key("[q->q]", 0, 1), 1}};
    TermList achieved = {{channel_key("[q->q]", 0, 1), 1}};

    InequalityCheck ok = check_inequality(t, led, achieved, ineq);
    CHECK(ok.pass);
    CHECK(ok.mismatches.empty());
    CHECK(ok.actual_consumed.at(qq) == 1);

    // consumed side disagrees
    ResourceInequality wrong = ineq;
    wrong.consumed[1].amount = 3;
    InequalityCheck bad = check_inequality(t, led, achieved, wrong);
    CHECK(!bad.pass);
    CHECK(!bad.mismatches.empty());

    // produced side disagrees
    InequalityCheck none = check_inequality(t, led, {}, ineq);
    CHECK(!none.pass);
}
